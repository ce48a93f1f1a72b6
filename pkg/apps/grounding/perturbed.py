"""
Noisy wrapper around another grounder, for robustness experiments.
"""

from typing import List, Optional

import numpy as np

from apps.core.exceptions import ConfigurationError
from .base import Grounder
from .scene import Scene


class PerturbedGrounder(Grounder):
    """
    Adds uniform noise in [0, epsilon] to every score, clipped at 1.

    Noise is drawn from a generator seeded once per instance, so two
    instances with the same seed perturb the same call sequence identically.
    """

    name = 'perturbed'

    def __init__(self, inner: Grounder, epsilon: float, seed: int = 0):
        if not 0.0 <= epsilon <= 1.0:
            raise ConfigurationError(f'noise epsilon must lie in [0, 1], got {epsilon}')
        super().__init__(inner.scene)
        self.inner = inner
        self.epsilon = epsilon
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def with_scene(self, scene: Scene) -> 'PerturbedGrounder':
        return PerturbedGrounder(self.inner.with_scene(scene), self.epsilon, self.seed)

    def _score(self, question: str, num_objects: int):
        clean = self.inner.score(question, num_objects)
        noise = self.rng.uniform(0.0, self.epsilon, size=clean.shape)
        return np.minimum(1.0, clean + noise)

    def _query(self, question: str, target: Optional[int]) -> str:
        return self.inner.query(question, target)

    def _propose(self, names: List[str]) -> Scene:
        return self.inner.propose_objects(names)
