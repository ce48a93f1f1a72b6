"""
The perception boundary between the executor and a grounding backend.

Every grounder answers three kinds of request against its bound scene:
``score`` (a predicate of arity 0, 1 or 2 returning a scalar, an N-vector
or an N x N matrix of probabilities), ``query`` (a free-text answer about
the image or one object) and ``detect`` (object proposal by class names).
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from apps.core.exceptions import ArityMismatchError, GroundingError, MalformedResponseError
from .prompts import PRIMARY_BOX, SECONDARY_BOX
from .scene import Scene

logger = logging.getLogger(__name__)

SCORE = 'score'
QUERY = 'query'
DETECT = 'detect'

ARITIES = (0, 1, 2)


def normalize_logits(ly: float, ln: float) -> float:
    """
    Probability of "Yes" from the Yes/No token logits.

    Two-way softmax with the larger logit subtracted first, so it equals
    sigmoid(ly - ln) without overflowing for large logits.
    """
    if not (math.isfinite(ly) and math.isfinite(ln)):
        raise MalformedResponseError(f'non-finite logits ({ly}, {ln}) in grounding response')
    top = max(ly, ln)
    yes = math.exp(ly - top)
    no = math.exp(ln - top)
    return yes / (yes + no)


def targets_for(num_objects: int, n: int) -> Tuple:
    """Target ids (arity 1) or ordered id pairs without the diagonal (arity 2)."""
    if num_objects == 1:
        return tuple(range(n))
    if num_objects == 2:
        return tuple((x, y) for x in range(n) for y in range(n) if x != y)
    return ()


@dataclass(frozen=True)
class GroundingRequest:
    kind: str
    question: str = ''
    num_objects: int = 0
    targets: Tuple = ()
    names: Tuple[str, ...] = ()
    image_ref: Optional[str] = None

    @property
    def prompt_meta(self) -> Dict[str, str]:
        if self.num_objects == 2:
            return {'primary': PRIMARY_BOX, 'secondary': SECONDARY_BOX}
        if self.num_objects == 1 or (self.kind == QUERY and self.targets):
            return {'primary': PRIMARY_BOX}
        return {}

    def to_wire(self) -> Dict:
        body = {'kind': self.kind, 'image_ref': self.image_ref}
        if self.kind == DETECT:
            body['names'] = list(self.names)
            return body
        body['question'] = self.question
        body['num_objects'] = self.num_objects
        body['targets'] = [list(t) if isinstance(t, tuple) else t for t in self.targets]
        body['prompt_meta'] = self.prompt_meta
        return body


@dataclass(frozen=True)
class GroundingResponse:
    """Exactly one of scores, logits, text or boxes is set."""
    scores: Optional[np.ndarray] = None
    logits: Optional[np.ndarray] = None
    text: Optional[str] = None
    boxes: Optional[List[Tuple[float, float, float, float]]] = None

    def probabilities(self) -> np.ndarray:
        """Scores, with Yes/No logit pairs normalized along the last axis."""
        if self.scores is not None:
            return self.scores
        if self.logits is None:
            raise MalformedResponseError('response carries neither scores nor logits')
        flat = self.logits.reshape(-1, 2)
        probs = np.array([normalize_logits(float(ly), float(ln)) for ly, ln in flat], dtype=np.float64)
        return probs.reshape(self.logits.shape[:-1])


def check_scores(data, num_objects: int, n: int) -> np.ndarray:
    """Validate a probability tensor against the arity contract."""
    array = np.asarray(data, dtype=np.float64)
    expected = {0: (), 1: (n,), 2: (n, n)}[num_objects]
    if array.shape != expected:
        raise MalformedResponseError(
            f'arity {num_objects} over {n} objects needs shape {expected}, got {array.shape}'
        )
    if not np.all(np.isfinite(array)):
        raise MalformedResponseError('non-finite score in grounding response')
    if np.any(array < 0.0) or np.any(array > 1.0):
        raise MalformedResponseError('grounding score out of [0, 1]')
    return array


class Grounder(ABC):
    """
    A perception backend bound to one scene.

    Subclasses implement ``_score``, ``_query`` and ``_propose``; the public
    methods validate arguments and results so every backend honours the
    same contract.
    """

    name = 'grounder'

    def __init__(self, scene: Scene):
        self.scene = scene

    @property
    def num_objects(self) -> int:
        return len(self.scene)

    def score(self, question: str, num_objects: int) -> np.ndarray:
        if num_objects not in ARITIES:
            raise ArityMismatchError(f'num_objects must be 0, 1 or 2, got {num_objects}')
        if not question or not question.strip():
            raise GroundingError('score() needs a non-empty question')
        result = self._score(question, num_objects)
        return check_scores(result, num_objects, self.num_objects)

    def query(self, question: str, target: Optional[int] = None) -> str:
        if target is not None and not 0 <= target < self.num_objects:
            raise GroundingError(f'query target {target} is not an object id (N={self.num_objects})')
        answer = self._query(question, target)
        if not isinstance(answer, str):
            raise MalformedResponseError(f'query answer must be text, got {answer!r}')
        return answer

    def propose_objects(self, names: Sequence[str]) -> Scene:
        """Candidate objects for ``names``; the returned scene defines N for a run."""
        if not names:
            raise GroundingError('propose_objects() needs at least one name')
        scene = self._propose([str(n) for n in names])
        logger.debug(f'{self.name} proposed {len(scene)} objects for {list(names)}')
        return scene

    @abstractmethod
    def with_scene(self, scene: Scene) -> 'Grounder':
        """The same backend bound to another scene."""

    @abstractmethod
    def _score(self, question: str, num_objects: int):
        ...

    @abstractmethod
    def _query(self, question: str, target: Optional[int]) -> str:
        ...

    @abstractmethod
    def _propose(self, names: List[str]) -> Scene:
        ...
