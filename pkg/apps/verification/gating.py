"""
Confidence gating of symbolic answers.

The executor's scores are softmax-normalized at temperature ``temp``; when
the largest probability stays below ``tau_gate`` the backbone model's own
answer is used instead. ``tau_gate`` is unrelated to the smoothing
temperature of the soft comparisons.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
from django.conf import settings

from apps.core.exceptions import VerificationError
from apps.executor.outcome import ObjectRef, YesNo

logger = logging.getLogger(__name__)

SYMBOLIC = 'symbolic'
BACKBONE = 'backbone'


@dataclass(frozen=True)
class GateParams:
    tau_gate: float = 0.5
    temp: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.tau_gate < 1.0:
            raise VerificationError(f'gate threshold must lie in (0, 1), got {self.tau_gate}')
        if not self.temp > 0.0:
            raise VerificationError(f'gate temperature must be positive, got {self.temp}')

    @classmethod
    def preset(cls, name: str) -> 'GateParams':
        presets = settings.NEPT_GATE_PRESETS
        try:
            values = presets[name.lower()]
        except KeyError:
            raise VerificationError(f"unknown gate preset '{name}', expected one of {', '.join(sorted(presets))}")
        return cls(tau_gate=values['tau'], temp=values['temp'])


@dataclass(frozen=True)
class GateDecision:
    answer: Any
    max_prob: float
    decision: str

    @property
    def used_symbolic(self) -> bool:
        return self.decision == SYMBOLIC

    def to_dict(self) -> Dict[str, Any]:
        return {'max_prob': self.max_prob, 'decision': self.decision}


def confidence_gate(executor_scores: Sequence[float], symbolic_answer, backbone_answer,
                    params: GateParams) -> GateDecision:
    scores = np.asarray(executor_scores, dtype=np.float64).reshape(-1)
    if scores.size == 0:
        raise VerificationError('confidence gating needs at least one score')
    if not params.temp > 0.0:
        raise VerificationError(f'gate temperature must be positive, got {params.temp}')
    scaled = scores / params.temp
    shifted = np.exp(scaled - scaled.max())
    max_prob = float(shifted.max() / shifted.sum())
    if max_prob < params.tau_gate:
        logger.debug(f'Gate fell back to the backbone (max prob {max_prob:.4f} < {params.tau_gate})')
        return GateDecision(backbone_answer, max_prob, BACKBONE)
    return GateDecision(symbolic_answer, max_prob, SYMBOLIC)


def gate_scores(answer) -> Optional[np.ndarray]:
    """
    Score vector gated for an executor answer.

    Yes/no answers use [s, 1 - s]; object selections use the returned
    object scores. Other answers are not gated.
    """
    if isinstance(answer, YesNo):
        return np.array([answer.score, 1.0 - answer.score])
    if isinstance(answer, ObjectRef) and answer.scores:
        return np.array(answer.scores)
    return None
