"""
Spatial predicates computed from box positions and depth estimates.
"""

import numpy as np

from apps.core.exceptions import ArityMismatchError, GroundingError
from .oracle import SPATIAL, OracleGrounder, canonical
from .scene import Scene


def geometric_score(scene: Scene, predicate: str, num_objects: int = 2) -> np.ndarray:
    """
    Relation matrix for left/right (box centers) or front/behind (depth).

    Comparisons are strict, so equal centers or depths give 0 both ways and
    the diagonal is always 0. Larger depth means farther from the camera.
    """
    if predicate not in SPATIAL:
        raise GroundingError(f"'{predicate}' is not a spatial predicate")
    if num_objects != 2:
        raise ArityMismatchError(f"'{predicate}' takes num_objects=2, got {num_objects}")

    if predicate in ('left', 'right'):
        keys = np.array([obj.center[0] for obj in scene.objects], dtype=np.float64)
    else:
        missing = [obj.id for obj in scene.objects if obj.depth is None]
        if missing:
            raise GroundingError(f"'{predicate}' needs depth estimates; objects {missing} have none")
        keys = np.array([obj.depth for obj in scene.objects], dtype=np.float64)

    subject, target = keys[:, None], keys[None, :]
    if predicate in ('left', 'front'):
        holds = subject < target
    else:
        holds = subject > target
    return holds.astype(np.float64).reshape(len(scene), len(scene))


class GeometricGrounder(OracleGrounder):
    """Spatial relations from geometry; every other predicate from the scene graph."""

    name = 'geometric'

    def _score(self, question: str, num_objects: int):
        token = canonical(question)
        if token in SPATIAL:
            return geometric_score(self.scene, token, num_objects)
        return super()._score(question, num_objects)
