"""
Runtime values of the program language.

Crisp values are plain Python objects (bool, int, float, str, list);
probabilities and soft counts are SoftValues recorded on the run's tape.
Iterating a soft vector yields (object id, score) pairs as tuples.
"""

import math

from apps.core.exceptions import FlavorError
from apps.tensor.soft import MATRIX, SCALAR, VECTOR, SoftValue

BOOLEAN = 'Boolean'
INTEGER = 'Integer'
REAL = 'Real'
TEXT = 'Text'
LIST = 'List'
PAIR = 'Pair'
SOFT_SCALAR = 'Soft Scalar'
SOFT_VECTOR = 'Soft Vector'
SOFT_MATRIX = 'Soft Matrix'
SOFT_COUNT = 'SoftCount'

_SOFT_FLAVORS = {SCALAR: SOFT_SCALAR, VECTOR: SOFT_VECTOR, MATRIX: SOFT_MATRIX}


def flavor(value) -> str:
    if isinstance(value, SoftValue):
        return SOFT_COUNT if value.is_count else _SOFT_FLAVORS[value.shape]
    if isinstance(value, bool):
        return BOOLEAN
    if isinstance(value, int):
        return INTEGER
    if isinstance(value, float):
        return REAL
    if isinstance(value, str):
        return TEXT
    if isinstance(value, list):
        return LIST
    if isinstance(value, tuple):
        return PAIR
    raise FlavorError(f'not a program value: {value!r}')


def is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def is_soft(value) -> bool:
    return isinstance(value, SoftValue)


def is_soft_scalar(value) -> bool:
    """Probability or soft count scalar."""
    return isinstance(value, SoftValue) and value.shape == SCALAR


def element_flavor(value) -> str:
    """Flavor used for list homogeneity; soft tensors also compare by size."""
    kind = flavor(value)
    if isinstance(value, SoftValue) and value.shape != SCALAR:
        return f'{kind}({value.size})'
    return kind


def check_homogeneous(elements) -> list:
    flavors = {element_flavor(e) for e in elements}
    if len(flavors) > 1:
        raise FlavorError(f'list elements must share one flavor, got {", ".join(sorted(flavors))}')
    return list(elements)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def describe(value) -> str:
    """Short rendering for traces and diagnostics."""
    if isinstance(value, SoftValue):
        return f'{flavor(value)} {value.tolist()}'
    if isinstance(value, str):
        return f'Text "{value}"'
    return f'{flavor(value)} {value!r}'
