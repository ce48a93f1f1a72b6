"""
Differentiable soft logic over SoftValues.

Forward semantics follow the fuzzy-logic operator table: min/max
connectives, sum-product relational conjunction, max/min/sum/softmax
quantifiers and logistic-smoothed scalar comparisons. Every result is
recorded on the owning tape together with what its backward rule needs.
"""

import math
from typing import Optional, Union

import numpy as np

from apps.core.exceptions import ShapeMismatchError, SoftLogicError
from .soft import MATRIX, SCALAR, VECTOR, SmoothingParams, SoftValue
from .tape import Tape, backward_rule

AND = 'and'
OR = 'or'
IMPLIES = 'implies'
NOT = 'not'
CONNECTIVES = (AND, OR, IMPLIES, NOT)

EXISTS = 'exists'
FORALL = 'forall'
COUNT = 'count'
IOTA = 'iota'
QUANTIFIERS = (EXISTS, FORALL, COUNT, IOTA)

EQ = 'eq'
GT = 'gt'

ADD = 'add'
SUB = 'sub'
MUL = 'mul'
DIV = 'div'

Operand = Union[SoftValue, int, float]


def sigmoid(z: float) -> float:
    """Logistic function, evaluated without overflow for large |z|."""
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def softmax(values: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    shifted = (np.asarray(values, dtype=np.float64) - np.max(values)) / temperature
    exps = np.exp(shifted)
    return exps / exps.sum()


class SoftLogic:
    """
    Operator algebra bound to one tape and one set of smoothing parameters.

    ``relate_literal`` switches relational conjunction from the
    filter-then-relate reading (sum over related objects weighted by their
    own scores) to the literal alpha_x * sum_y beta_xy form.
    """

    def __init__(self, tape: Optional[Tape] = None, params: Optional[SmoothingParams] = None,
                 relate_literal: bool = False):
        self.tape = tape if tape is not None else Tape()
        self.params = params if params is not None else SmoothingParams()
        self.relate_literal = relate_literal

    # Leaves and constants

    def score(self, data, label: Optional[str] = None) -> SoftValue:
        return self.tape.leaf(data, label=label)

    def constant(self, data, is_count: bool = False) -> SoftValue:
        return self.tape.constant(data, is_count=is_count)

    def _promote(self, value: Operand) -> SoftValue:
        if isinstance(value, SoftValue):
            return value
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SoftLogicError(f'cannot promote {value!r} to a soft count')
        return self.constant(float(value), is_count=True)

    # Connectives

    def connective(self, kind: str, lhs: SoftValue, rhs: Optional[SoftValue] = None) -> SoftValue:
        if kind not in CONNECTIVES:
            raise SoftLogicError(f'unknown connective {kind!r}')
        for operand in (lhs, rhs):
            if operand is not None and operand.is_count:
                raise SoftLogicError(f'soft counts cannot be operands of {kind}')

        if kind == NOT:
            if rhs is not None:
                raise SoftLogicError('not takes a single operand')
            return self.tape.record(NOT, [lhs], 1.0 - lhs.data)

        if rhs is None:
            raise SoftLogicError(f'{kind} needs two operands')
        if lhs.shape == VECTOR and rhs.shape == MATRIX:
            if kind != AND:
                raise ShapeMismatchError(f'{kind} is undefined between a vector and a matrix')
            return self.relate(lhs, rhs)
        if lhs.data.shape != rhs.data.shape:
            raise ShapeMismatchError(
                f'{kind} operands differ in shape: {lhs.data.shape} vs {rhs.data.shape}'
            )

        a, b = lhs.data, rhs.data
        if kind == AND:
            first = a <= b
            result = np.minimum(a, b)
        elif kind == OR:
            first = a >= b
            result = np.maximum(a, b)
        else:
            first = (1.0 - a) >= b
            result = np.maximum(1.0 - a, b)
        return self.tape.record(kind, [lhs, rhs], result, saved=(first,))

    def relate(self, alpha: SoftValue, beta: SoftValue) -> SoftValue:
        if alpha.shape != VECTOR or beta.shape != MATRIX:
            raise ShapeMismatchError(f'relate needs a vector and a matrix, got {alpha.shape} and {beta.shape}')
        if alpha.size != beta.size:
            raise ShapeMismatchError(f'relate dimension mismatch: {alpha.size} objects vs {beta.size}')
        if self.relate_literal:
            total = alpha.data * beta.data.sum(axis=1)
        else:
            total = beta.data @ alpha.data
        passes = total <= 1.0
        op = 'relate_literal' if self.relate_literal else 'relate'
        return self.tape.record(op, [alpha, beta], np.minimum(1.0, total), saved=(passes,))

    # Quantifiers

    def quantify(self, kind: str, v: SoftValue) -> SoftValue:
        if kind not in QUANTIFIERS:
            raise SoftLogicError(f'unknown quantifier {kind!r}')
        if v.shape != VECTOR:
            raise ShapeMismatchError(f'{kind}() needs a vector, got a {v.shape}')
        if v.size == 0:
            raise SoftLogicError(f'{kind}() over an empty vector')
        data = v.data
        if kind == EXISTS:
            index = int(np.argmax(data))
            return self.tape.record(EXISTS, [v], data[index], saved=(index,))
        if kind == FORALL:
            index = int(np.argmin(data))
            return self.tape.record(FORALL, [v], data[index], saved=(index,))
        if kind == COUNT:
            return self.tape.record(COUNT, [v], data.sum(), is_count=True)
        distribution = softmax(data)
        return self.tape.record(IOTA, [v], distribution, saved=(distribution,))

    # Smoothed comparisons

    def soft_compare(self, kind: str, s1: Operand, s2: Operand) -> SoftValue:
        lhs, rhs = self._promote(s1), self._promote(s2)
        if lhs.shape != SCALAR or rhs.shape != SCALAR:
            raise ShapeMismatchError(f'{kind} compares scalars, got {lhs.shape} and {rhs.shape}')
        tau, gamma = self.params.tau, self.params.gamma
        gap = lhs.item() - rhs.item()
        if kind == EQ:
            y = sigmoid(tau * (gamma - abs(gap)) / gamma)
        elif kind == GT:
            y = sigmoid(tau * (gap - 1.0 + gamma))
        else:
            raise SoftLogicError(f'unknown comparison {kind!r}')
        return self.tape.record(kind, [lhs, rhs], y, saved=(y, float(np.sign(gap)), tau, gamma))

    # Soft-count arithmetic

    def arithmetic(self, op: str, lhs: Operand, rhs: Operand) -> SoftValue:
        a, b = self._promote(lhs), self._promote(rhs)
        for operand in (a, b):
            if not operand.is_count:
                raise SoftLogicError(f'arithmetic is defined on soft counts, got a {operand.shape} probability')
        x, y = a.item(), b.item()
        if op == ADD:
            result = x + y
        elif op == SUB:
            result = x - y
        elif op == MUL:
            result = x * y
        elif op == DIV:
            if y == 0.0:
                raise SoftLogicError('division by a zero soft count')
            result = x / y
        else:
            raise SoftLogicError(f'unknown arithmetic op {op!r}')
        return self.tape.record(op, [a, b], result, is_count=True)

    def negate(self, v: SoftValue) -> SoftValue:
        if not v.is_count:
            raise SoftLogicError('unary minus is defined on soft counts only')
        return self.tape.record('neg', [v], -v.data, is_count=True)

    def absolute(self, v: SoftValue) -> SoftValue:
        if not v.is_count:
            raise SoftLogicError('abs() is defined on soft counts only')
        return self.tape.record('abs', [v], np.abs(v.data), is_count=True)

    def select(self, v: SoftValue, index: int) -> SoftValue:
        """Entry ``index`` of a vector, or row ``index`` of a matrix."""
        if v.shape == SCALAR:
            raise ShapeMismatchError('cannot index a scalar')
        if not 0 <= index < v.size:
            raise ShapeMismatchError(f'index {index} out of range for {v.size} objects')
        return self.tape.record('select', [v], v.data[index], saved=(index,))

    def backward(self, output: SoftValue):
        return self.tape.backward(output)


# Backward rules

@backward_rule(AND)
@backward_rule(OR)
def _elementwise_choice(node, g, inputs):
    first, = node.saved
    return g * first, g * (~first)


@backward_rule(IMPLIES)
def _implies_backward(node, g, inputs):
    first, = node.saved
    return -g * first, g * (~first)


@backward_rule(NOT)
def _not_backward(node, g, inputs):
    return (-g,)


@backward_rule('relate')
def _relate_backward(node, g, inputs):
    alpha, beta = inputs
    passes, = node.saved
    gx = g * passes
    return beta.T @ gx, np.outer(gx, alpha)


@backward_rule('relate_literal')
def _relate_literal_backward(node, g, inputs):
    alpha, beta = inputs
    passes, = node.saved
    gx = g * passes
    return gx * beta.sum(axis=1), np.outer(gx * alpha, np.ones_like(alpha))


@backward_rule(EXISTS)
@backward_rule(FORALL)
@backward_rule('select')
def _pick_backward(node, g, inputs):
    index, = node.saved
    grad = np.zeros_like(inputs[0])
    grad[index] = g
    return (grad,)


@backward_rule(COUNT)
def _count_backward(node, g, inputs):
    return (np.full_like(inputs[0], float(g)),)


@backward_rule(IOTA)
def _iota_backward(node, g, inputs):
    distribution, = node.saved
    return (distribution * (g - np.dot(g, distribution)),)


@backward_rule(EQ)
def _eq_backward(node, g, inputs):
    y, sign, tau, gamma = node.saved
    d1 = -g * y * (1.0 - y) * (tau / gamma) * sign
    return d1, -d1


@backward_rule(GT)
def _gt_backward(node, g, inputs):
    y, sign, tau, gamma = node.saved
    d1 = g * y * (1.0 - y) * tau
    return d1, -d1


@backward_rule(ADD)
def _add_backward(node, g, inputs):
    return g, g


@backward_rule(SUB)
def _sub_backward(node, g, inputs):
    return g, -g


@backward_rule(MUL)
def _mul_backward(node, g, inputs):
    a, b = inputs
    return g * b, g * a


@backward_rule(DIV)
def _div_backward(node, g, inputs):
    a, b = inputs
    return g / b, -g * a / (b * b)


@backward_rule('neg')
def _neg_backward(node, g, inputs):
    return (-g,)


@backward_rule('abs')
def _abs_backward(node, g, inputs):
    return (g * np.sign(inputs[0]),)
