"""
Soft values: probability tensors carried through program execution.

A SoftValue is a scalar, a length-N vector (per-object scores) or an N x N
matrix (relation scores). Entries are probabilities in [0, 1]; soft counts
are the one exception, an unclamped scalar flavor produced by ``count()``
and soft-count arithmetic.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from apps.core.exceptions import ConfigurationError, ShapeMismatchError, SoftRangeError

SCALAR = 'scalar'
VECTOR = 'vector'
MATRIX = 'matrix'

_SHAPE_BY_NDIM = {0: SCALAR, 1: VECTOR, 2: MATRIX}


@dataclass(frozen=True)
class SmoothingParams:
    """Temperature and margin of the smoothed scalar comparisons."""
    tau: float = 0.25
    gamma: float = 0.25

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError(f'tau must be positive, got {self.tau}')
        if not 0 < self.gamma <= 1:
            raise ConfigurationError(f'gamma must lie in (0, 1], got {self.gamma}')


class SoftValue:
    """
    Immutable probability tensor with an optional tape node id.

    Construction validates shape and range; out-of-range data is an error,
    never silently clamped.
    """

    __slots__ = ('data', 'node', 'is_count')

    def __init__(self, data, node: Optional[int] = None, is_count: bool = False):
        array = np.array(data, dtype=np.float64)
        if array.ndim > 2:
            raise ShapeMismatchError(f'soft values have at most two dimensions, got {array.ndim}')
        if array.ndim == 2 and array.shape[0] != array.shape[1]:
            raise ShapeMismatchError(f'relation matrices must be square, got {array.shape}')
        if not np.all(np.isfinite(array)):
            raise SoftRangeError('soft values must be finite')
        if is_count:
            if array.ndim != 0:
                raise ShapeMismatchError('soft counts are scalars')
        elif np.any(array < 0.0) or np.any(array > 1.0):
            raise SoftRangeError(f'soft value entries must lie in [0, 1], got {array.tolist()}')
        array.setflags(write=False)
        object.__setattr__(self, 'data', array)
        object.__setattr__(self, 'node', node)
        object.__setattr__(self, 'is_count', bool(is_count))

    def __setattr__(self, name, value):
        raise AttributeError('SoftValue is immutable')

    @property
    def shape(self) -> str:
        return _SHAPE_BY_NDIM[self.data.ndim]

    @property
    def size(self) -> int:
        """Object count N for vectors and matrices, 1 for scalars."""
        return 1 if self.data.ndim == 0 else self.data.shape[0]

    def item(self) -> float:
        if self.data.ndim != 0:
            raise ShapeMismatchError(f'expected a scalar, got a {self.shape}')
        return float(self.data)

    def tolist(self):
        return self.data.tolist()

    def __repr__(self):
        flavor = 'SoftCount' if self.is_count else 'SoftValue'
        return f'{flavor}({self.data.tolist()!r}, node={self.node})'
