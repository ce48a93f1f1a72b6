import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

from apps.core.exceptions import GroundingError
from apps.executor.outcome import ObjectRef, Outcome
from apps.grounding.remote import RemoteGrounder
from apps.grounding.scene import Scene, object_for_box
from .arbiter import BACKBONE_CANDIDATE, arbiter_decide, arbiter_prompt
from .gating import SYMBOLIC, GateParams, confidence_gate, gate_scores

logger = logging.getLogger(__name__)

UNGATED = 'ungated'
ARBITER = 'arbiter'


def answer_key(value) -> Any:
    """
    Comparable form of a raw answer value.

    Text is stripped and lower-cased, integral numbers become ints and
    digit strings are read as counts.
    """
    if isinstance(value, bool):
        return 'yes' if value else 'no'
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        text = value.strip().lower().rstrip('.')
        if text.lstrip('-').isdigit():
            return int(text)
        return text
    return value


@dataclass(frozen=True)
class VerifiedAnswer:
    """Final answer after verification, with the decision that produced it."""
    answer: Any
    decision: str
    max_prob: Optional[float] = None
    box: Optional[tuple] = None
    arbiter_parsed: Optional[bool] = None

    @property
    def used_symbolic(self) -> bool:
        return self.decision in (SYMBOLIC, UNGATED) or (
            self.decision == ARBITER and self.answer == 'symbolic'
        )

    def to_dict(self) -> Dict[str, Any]:
        data = {'answer': self.answer, 'decision': self.decision, 'max_prob': self.max_prob}
        if self.box is not None:
            data['box'] = list(self.box)
        if self.arbiter_parsed is not None:
            data['arbiter_parsed'] = self.arbiter_parsed
        return data


class AnswerVerifier:
    """
    Chooses between the symbolic answer of a run and a backbone answer.

    Yes/no and object answers are confidence-gated. With a remote grounder,
    object answers are instead arbitrated by the perception model whenever
    the two candidates differ. Counts and text keep the symbolic answer.
    """

    def __init__(self, params: GateParams, grounder=None):
        self.params = params
        self.grounder = grounder

    def verify(self, outcome: Outcome, backbone_answer, scene: Optional[Scene] = None,
               query: str = '') -> VerifiedAnswer:
        """
        Verify one executor outcome.

        Args:
            outcome: Finished run of the symbolic program
            backbone_answer: The backbone model's answer; for object answers an
                object id of ``scene`` or an ``[x, y, w, h]`` box
            scene: Scene the backbone answer refers to
            query: Question or referring expression, used by the arbiter

        Returns:
            VerifiedAnswer with the chosen answer key (a box for object answers)
        """
        answer = outcome.answer
        if isinstance(answer, ObjectRef):
            return self._verify_object(answer, backbone_answer, scene, query)

        scores = gate_scores(answer)
        if scores is None or backbone_answer is None:
            return VerifiedAnswer(answer.key(), UNGATED)
        decision = confidence_gate(scores, answer.key(), answer_key(backbone_answer), self.params)
        return VerifiedAnswer(decision.answer, decision.decision, decision.max_prob)

    def _verify_object(self, answer: ObjectRef, backbone_answer, scene: Optional[Scene],
                       query: str) -> VerifiedAnswer:
        symbolic_box = answer.box
        backbone_box = self.backbone_box(backbone_answer, scene)
        if backbone_box is None:
            return VerifiedAnswer(answer.key(), UNGATED, box=symbolic_box)

        if isinstance(self.grounder, RemoteGrounder) and query:
            return self._arbitrate(answer, symbolic_box, backbone_box, query)

        decision = confidence_gate(gate_scores(answer), 'symbolic', 'backbone', self.params)
        box = symbolic_box if decision.decision == SYMBOLIC else backbone_box
        return VerifiedAnswer(decision.answer, decision.decision, decision.max_prob, box=box)

    def _arbitrate(self, answer: ObjectRef, symbolic_box, backbone_box, query: str) -> VerifiedAnswer:
        grounder_scene = self.grounder.scene
        first = object_for_box(grounder_scene, symbolic_box)
        second = object_for_box(grounder_scene, backbone_box)
        if first is None or second is None or first == second:
            return VerifiedAnswer('symbolic', ARBITER, box=symbolic_box)
        try:
            reply = self.grounder.ask_pair(arbiter_prompt(query), first, second)
        except GroundingError as e:
            logger.warning(f'Arbiter call failed ({e}); keeping the symbolic answer')
            return VerifiedAnswer('symbolic', ARBITER, box=symbolic_box, arbiter_parsed=False)
        decision = arbiter_decide(reply)
        if decision.choice == BACKBONE_CANDIDATE:
            return VerifiedAnswer('backbone', ARBITER, box=backbone_box, arbiter_parsed=decision.parsed)
        return VerifiedAnswer('symbolic', ARBITER, box=symbolic_box, arbiter_parsed=decision.parsed)

    @staticmethod
    def backbone_box(backbone_answer, scene: Optional[Scene]):
        if backbone_answer is None:
            return None
        if isinstance(backbone_answer, (list, tuple)) and len(backbone_answer) == 4:
            return tuple(float(v) for v in backbone_answer)
        if isinstance(backbone_answer, int) and not isinstance(backbone_answer, bool) and scene is not None:
            if 0 <= backbone_answer < len(scene):
                return scene.objects[backbone_answer].box
        logger.warning(f'Backbone answer {backbone_answer!r} names no object; keeping the symbolic answer')
        return None
