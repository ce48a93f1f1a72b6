"""
Finished executions: the final answer, the grounding trace and gradients.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union


@dataclass(frozen=True)
class YesNo:
    value: bool
    score: float

    def render(self) -> str:
        return f"{'yes' if self.value else 'no'} (score={self.score:.3f})"

    def key(self):
        return 'yes' if self.value else 'no'

    def to_dict(self) -> Dict[str, Any]:
        return {'type': 'yesno', 'value': self.key(), 'score': self.score}


@dataclass(frozen=True)
class Count:
    value: int
    raw: float

    def render(self) -> str:
        return f'{self.value} (soft count={self.raw:.3f})'

    def key(self):
        return self.value

    def to_dict(self) -> Dict[str, Any]:
        return {'type': 'count', 'value': self.value, 'raw': self.raw}


@dataclass(frozen=True)
class Number:
    value: float

    def render(self) -> str:
        return repr(self.value)

    def key(self):
        return self.value

    def to_dict(self) -> Dict[str, Any]:
        return {'type': 'number', 'value': self.value}


@dataclass(frozen=True)
class Text:
    value: str

    def render(self) -> str:
        return self.value

    def key(self):
        return self.value.strip().lower()

    def to_dict(self) -> Dict[str, Any]:
        return {'type': 'text', 'value': self.value}


@dataclass(frozen=True)
class ObjectRef:
    object_id: int
    distribution: Tuple[float, ...]
    scores: Tuple[float, ...] = ()
    box: Optional[Tuple[float, float, float, float]] = None

    def render(self) -> str:
        return f'object {self.object_id} (p={self.distribution[self.object_id]:.3f})'

    def key(self):
        return self.object_id

    def to_dict(self) -> Dict[str, Any]:
        return {
            'type': 'object',
            'value': self.object_id,
            'distribution': list(self.distribution),
            'scores': list(self.scores),
            'box': list(self.box) if self.box is not None else None,
        }


@dataclass(frozen=True)
class NoObjects:

    def render(self) -> str:
        return 'no objects'

    def key(self):
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {'type': 'no_objects', 'value': None}


Answer = Union[YesNo, Count, Number, Text, ObjectRef, NoObjects]


@dataclass(frozen=True)
class TraceEntry:
    """One grounder invocation, in call order."""
    site: str
    kind: str
    question: str
    num_objects: Optional[int] = None
    target: Optional[int] = None
    shape: Tuple[int, ...] = ()
    text: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['shape'] = list(self.shape)
        return data


@dataclass
class Outcome:
    answer: Answer
    trace: List[TraceEntry] = field(default_factory=list)
    gradients: Optional[Dict[str, Any]] = None
    steps: int = 0

    @property
    def grounder_calls(self) -> int:
        return len(self.trace)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'answer': self.answer.to_dict(),
            'trace': [entry.to_dict() for entry in self.trace],
            'gradients': self.gradients,
            'steps': self.steps,
        }
