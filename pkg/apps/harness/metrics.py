"""
Corpus evaluation.

Items run concurrently, each with its own interpreter and a grounder bound
to the item's scene. Results are collected under a lock and reported in
corpus order, so the report does not depend on scheduling.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

from apps.core.exceptions import GenerationError, NeptError
from apps.executor.interpreter import run
from apps.executor.options import REG, ExecOptions
from apps.executor.outcome import NoObjects, ObjectRef
from apps.grounding.base import Grounder
from apps.grounding.remote import RemoteGrounder
from apps.grounding.scene import box_iou as iou
from apps.programs.parser import parse_source
from apps.verification.services import AnswerVerifier, answer_key
from .corpus import CorpusItem

logger = logging.getLogger(__name__)

IOU_THRESHOLD = 0.5


@dataclass
class ItemResult:
    index: int
    category: str
    executed: bool
    correct: bool
    grounder_calls: int = 0
    answer: Any = None
    error: Optional[str] = None
    verified_correct: Optional[bool] = None
    used_symbolic: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'index': self.index,
            'category': self.category,
            'executed': self.executed,
            'correct': self.correct,
            'grounder_calls': self.grounder_calls,
            'answer': self.answer,
            'error': self.error,
            'verified_correct': self.verified_correct,
            'used_symbolic': self.used_symbolic,
        }


@dataclass
class MetricsReport:
    results: List[ItemResult] = field(default_factory=list)
    wall_time: float = 0.0
    verified: bool = False

    @property
    def total(self) -> int:
        return len(self.results)

    @staticmethod
    def _percent(part: int, whole: int) -> float:
        return 100.0 * part / whole if whole else 0.0

    @property
    def accuracy(self) -> float:
        return self._percent(sum(r.correct for r in self.results), self.total)

    @property
    def execution_success(self) -> float:
        return self._percent(sum(r.executed for r in self.results), self.total)

    @property
    def mean_grounder_calls(self) -> float:
        return sum(r.grounder_calls for r in self.results) / self.total if self.total else 0.0

    @property
    def verified_accuracy(self) -> Optional[float]:
        if not self.verified:
            return None
        return self._percent(sum(bool(r.verified_correct) for r in self.results), self.total)

    @property
    def symbolic_share(self) -> Optional[float]:
        if not self.verified:
            return None
        gated = [r for r in self.results if r.used_symbolic is not None]
        return self._percent(sum(r.used_symbolic for r in gated), len(gated))

    def per_category(self) -> Dict[str, Dict[str, Any]]:
        table: Dict[str, Dict[str, Any]] = {}
        for result in self.results:
            row = table.setdefault(result.category, {'total': 0, 'correct': 0, 'executed': 0})
            row['total'] += 1
            row['correct'] += int(result.correct)
            row['executed'] += int(result.executed)
        for row in table.values():
            row['accuracy'] = self._percent(row['correct'], row['total'])
        return dict(sorted(table.items()))

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'total': self.total,
            'accuracy': self.accuracy,
            'execution_success': self.execution_success,
            'mean_grounder_calls': self.mean_grounder_calls,
            'wall_time': self.wall_time,
            'per_category': self.per_category(),
            'failures': [r.to_dict() for r in self.results if not r.executed],
        }
        if self.verified:
            data['verification'] = {
                'accuracy_before': self.accuracy,
                'accuracy_after': self.verified_accuracy,
                'symbolic_share': self.symbolic_share,
            }
        return data

    def render_table(self) -> str:
        lines = [f"{'category':<18}{'items':>8}{'accuracy':>11}{'executed':>11}"]
        for category, row in self.per_category().items():
            executed = self._percent(row['executed'], row['total'])
            lines.append(f"{category:<18}{row['total']:>8}{row['accuracy']:>10.2f}%{executed:>10.2f}%")
        lines.append(f"{'overall':<18}{self.total:>8}{self.accuracy:>10.2f}%{self.execution_success:>10.2f}%")
        lines.append(f'mean grounder calls: {self.mean_grounder_calls:.2f}')
        lines.append(f'wall time: {self.wall_time:.2f}s')
        if self.verified:
            lines.append(f'verified accuracy: {self.verified_accuracy:.2f}% '
                         f'(symbolic share {self.symbolic_share:.2f}%)')
        return '\n'.join(lines)


def is_correct(answer, item: CorpusItem) -> bool:
    if item.task == REG:
        if not isinstance(answer, ObjectRef) or answer.box is None:
            return False
        return iou(answer.box, item.ground_truth['box']) >= IOU_THRESHOLD
    if isinstance(answer, NoObjects):
        return item.ground_truth is None
    return answer.key() == answer_key(item.ground_truth)


class Evaluator:
    """Runs a corpus against a grounder and accumulates a MetricsReport."""

    def __init__(self, grounder: Grounder, options: Optional[ExecOptions] = None,
                 verifier: Optional[AnswerVerifier] = None, jobs: int = 1):
        self.grounder = grounder
        self.options = options or ExecOptions()
        self.verifier = verifier
        self.jobs = max(1, jobs)
        self._lock = threading.Lock()
        self._results: List[ItemResult] = []

    def evaluate(self, corpus: Sequence[CorpusItem]) -> MetricsReport:
        if not corpus:
            raise GenerationError('cannot evaluate an empty corpus')
        self._results = []
        started = time.monotonic()
        if self.jobs == 1:
            for item in corpus:
                self.run_item(item)
        else:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                list(pool.map(self.run_item, corpus))
        wall_time = time.monotonic() - started
        results = sorted(self._results, key=lambda r: r.index)
        report = MetricsReport(results, wall_time, verified=self.verifier is not None)
        logger.info(f'Evaluated {report.total} items: accuracy {report.accuracy:.2f}%, '
                    f'execution success {report.execution_success:.2f}%')
        return report

    def run_item(self, item: CorpusItem):
        result = self.evaluate_item(item)
        with self._lock:
            self._results.append(result)

    def evaluate_item(self, item: CorpusItem) -> ItemResult:
        grounder = self.grounder.with_scene(item.scene)
        try:
            program = parse_source(item.program)
            outcome = run(program, grounder, replace(self.options, task=item.task))
        except NeptError as e:
            logger.error(f'Item {item.index} ({item.category}) failed: {e}')
            return ItemResult(item.index, item.category, executed=False, correct=False,
                              error=f'{type(e).__name__}: {e}')

        result = ItemResult(
            item.index, item.category, executed=True,
            correct=is_correct(outcome.answer, item),
            grounder_calls=outcome.grounder_calls,
            answer=outcome.answer.to_dict(),
        )
        if self.verifier is not None:
            self.verify(item, outcome, grounder, result)
        return result

    def verify(self, item: CorpusItem, outcome, grounder: Grounder, result: ItemResult):
        backbone = item.backbone_answer
        if backbone is None and item.task != REG and isinstance(grounder, RemoteGrounder) and item.question:
            try:
                backbone = grounder.query(item.question)
            except NeptError as e:
                logger.warning(f'Backbone answer for item {item.index} unavailable: {e}')
        verifier = AnswerVerifier(self.verifier.params, grounder)
        verified = verifier.verify(outcome, backbone, item.scene, item.question)
        result.used_symbolic = verified.used_symbolic
        if item.task == REG:
            box = verified.box
            result.verified_correct = box is not None and iou(box, item.ground_truth['box']) >= IOU_THRESHOLD
        elif isinstance(outcome.answer, ObjectRef):
            result.verified_correct = result.correct and verified.used_symbolic
        else:
            result.verified_correct = verified.answer == answer_key(item.ground_truth)


def evaluate(corpus: Sequence[CorpusItem], grounder: Grounder, options: Optional[ExecOptions] = None,
             verifier: Optional[AnswerVerifier] = None, jobs: int = 1) -> MetricsReport:
    return Evaluator(grounder, options, verifier, jobs).evaluate(corpus)
