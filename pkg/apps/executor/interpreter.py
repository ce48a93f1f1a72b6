"""
Tree-walking interpreter for reasoning programs.

Control flow is crisp: conditions and loops are decided on concrete values,
soft scalars being thresholded at 0.5. Everything computed from grounding
scores stays soft and is recorded on the run's tape, so gradients of the
final answer with respect to each ``score`` call site can be exported.
"""

import logging
from collections import Counter
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from apps.core.exceptions import (
    BudgetExceededError, FlavorError, MissingReturnError, NeptError, SoftLogicError, UnboundNameError,
)
from apps.grounding.base import Grounder
from apps.programs import nodes
from apps.tensor import logic as ops
from apps.tensor.logic import SoftLogic, softmax
from apps.tensor.soft import SCALAR, VECTOR, SoftValue
from apps.tensor.tape import Tape
from .options import REG, ExecOptions
from .outcome import Count, NoObjects, Number, ObjectRef, Outcome, Text, TraceEntry, YesNo
from .values import (
    check_homogeneous, describe, flavor, is_number, is_soft, is_soft_scalar, round_half_up,
)

logger = logging.getLogger(__name__)

_ARITHMETIC = {nodes.ADD: ops.ADD, nodes.SUB: ops.SUB, nodes.MUL: ops.MUL, nodes.DIV: ops.DIV}

# Float noise tolerated below zero when a soft count becomes an answer
COUNT_SLACK = 1e-9


class _ReturnSignal(Exception):

    def __init__(self, value):
        super().__init__()
        self.value = value


def run(program: nodes.Program, grounder: Grounder, options: Optional[ExecOptions] = None) -> Outcome:
    """Execute ``program`` against ``grounder`` and finalize its answer."""
    return Interpreter(grounder, options).run(program)


def eval_expr(expr, env: Dict, grounder: Grounder, options: Optional[ExecOptions] = None):
    """Evaluate one expression in ``env``; soft results live on a fresh tape."""
    return Interpreter(grounder, options, env).eval(expr)


def truthiness(value) -> bool:
    """Crisp branch decision: soft scalars at >= 0.5, counts and numbers at > 0.5."""
    if isinstance(value, bool):
        return value
    if isinstance(value, SoftValue):
        if value.shape != SCALAR:
            raise FlavorError(f'cannot branch on a {flavor(value)}')
        score = value.item()
        return score > 0.5 if value.is_count else score >= 0.5
    if is_number(value):
        return value > 0.5
    if isinstance(value, str):
        return bool(value)
    raise FlavorError(f'cannot branch on a {flavor(value)}')


def iterate(value, logic: SoftLogic) -> List:
    """List elements in order, or (object id, score) pairs of a soft vector."""
    if isinstance(value, list):
        return list(value)
    if isinstance(value, SoftValue) and value.shape == VECTOR and not value.is_count:
        return [(i, logic.select(value, i)) for i in range(value.size)]
    raise FlavorError(f'cannot iterate over a {flavor(value)}')


def finalize(value, task: str, logic: SoftLogic) -> Tuple:
    """
    Answer for a returned value, plus the scalar to differentiate (or None).

    REG answers select the argmax object, lowest index on ties; the
    softmax distribution is reported alongside but not recorded.
    """
    if task == REG:
        if not (isinstance(value, SoftValue) and value.shape == VECTOR and not value.is_count):
            raise FlavorError(f'a REG program must return a soft vector, got a {flavor(value)}')
        return _select_object(value, logic)

    if isinstance(value, SoftValue):
        if value.is_count:
            raw = value.item()
            if raw < -COUNT_SLACK:
                raise SoftLogicError(f'a count answer cannot be negative, got {raw:g}')
            return Count(round_half_up(raw), raw), value
        if value.shape == SCALAR:
            score = value.item()
            return YesNo(score >= 0.5, score), value
        if value.shape == VECTOR:
            return _select_object(value, logic)
        raise FlavorError('a VQA program cannot return a relation matrix')
    if isinstance(value, bool):
        return YesNo(value, 1.0 if value else 0.0), None
    if isinstance(value, int):
        return Count(value, float(value)), None
    if isinstance(value, float):
        return Number(value), None
    if isinstance(value, str):
        return Text(value), None
    raise FlavorError(f'cannot answer with a {flavor(value)}')


def _select_object(value: SoftValue, logic: SoftLogic) -> Tuple:
    if value.size == 0:
        return NoObjects(), None
    scores = value.data
    index = int(np.argmax(scores))
    distribution = softmax(scores)
    answer = ObjectRef(index, tuple(float(p) for p in distribution), tuple(float(s) for s in scores))
    return answer, logic.select(value, index)


class Interpreter:
    """
    One execution: owns the environment, the tape and the grounding trace.

    Not thread-safe; concurrent runs each get their own interpreter.
    """

    def __init__(self, grounder: Grounder, options: Optional[ExecOptions] = None, env: Optional[Dict] = None):
        self.grounder = grounder
        self.options = options or ExecOptions()
        self.tape = Tape()
        self.logic = SoftLogic(self.tape, self.options.smoothing, self.options.relate_literal)
        self.env: Dict = dict(env or {})
        self.steps = 0
        self.trace: List[TraceEntry] = []
        self._site_calls: Counter = Counter()

    def run(self, program: nodes.Program) -> Outcome:
        if self.options.object_names and not self.propose(self.options.object_names):
            return Outcome(NoObjects(), list(self.trace), None, self.steps)
        try:
            self.exec_block(program.statements)
        except _ReturnSignal as signal:
            answer, output = finalize(signal.value, self.options.task, self.logic)
            if isinstance(answer, ObjectRef):
                answer = replace(answer, box=self.grounder.scene.objects[answer.object_id].box)
            gradients = None
            if self.options.gradients:
                gradients = self.gradients_of(output)
            logger.debug(f'Run finished after {self.steps} steps and {len(self.trace)} grounder calls')
            return Outcome(answer, list(self.trace), gradients, self.steps)
        raise MissingReturnError('program finished without executing a return statement')

    def propose(self, names) -> bool:
        self.charge_call()
        scene = self.grounder.propose_objects(list(names))
        self.trace.append(TraceEntry('propose', 'detect', ', '.join(names), shape=(len(scene),)))
        if len(scene) == 0:
            logger.info(f'No objects proposed for {list(names)}')
            return False
        self.grounder = self.grounder.with_scene(scene)
        return True

    def gradients_of(self, output: Optional[SoftValue]) -> Optional[Dict[str, list]]:
        if output is None:
            logger.info('Answer is crisp; no gradients to export')
            return None
        adjoints = self.tape.backward(output)
        return {self.tape.nodes[leaf].label: grad.tolist() for leaf, grad in adjoints.items()}

    # Budgets and call sites

    def tick(self):
        self.steps += 1
        if self.steps > self.options.step_budget:
            raise BudgetExceededError(f'step budget of {self.options.step_budget} exceeded')

    def charge_call(self):
        if len(self.trace) >= self.options.call_budget:
            raise BudgetExceededError(f'grounder call budget of {self.options.call_budget} exceeded')

    def site_key(self, pos: nodes.Position) -> str:
        base = f'{pos.line}:{pos.column}'
        repeat = self._site_calls[base]
        self._site_calls[base] += 1
        return base if repeat == 0 else f'{base}#{repeat}'

    # Statements

    def exec_block(self, statements):
        for statement in statements:
            self.exec_stmt(statement)

    def exec_stmt(self, stmt):
        try:
            self._exec(stmt)
        except NeptError as e:
            raise e.locate(stmt.pos.line, stmt.pos.column) if stmt.pos.line else e

    def _exec(self, stmt):
        self.tick()
        if isinstance(stmt, nodes.Assign):
            self.env[stmt.target] = self.eval(stmt.value)
        elif isinstance(stmt, nodes.ExprStmt):
            self.eval(stmt.value)
        elif isinstance(stmt, nodes.Return):
            raise _ReturnSignal(self.eval(stmt.value))
        elif isinstance(stmt, nodes.If):
            if truthiness(self.eval(stmt.test)):
                self.exec_block(stmt.body)
                return
            for test, body in stmt.elifs:
                if truthiness(self.eval(test)):
                    self.exec_block(body)
                    return
            self.exec_block(stmt.orelse)
        elif isinstance(stmt, nodes.For):
            for item in iterate(self.eval(stmt.iterable), self.logic):
                self.tick()
                self.env[stmt.target] = item
                self.exec_block(stmt.body)
        else:
            raise FlavorError(f'unsupported statement {type(stmt).__name__}')

    # Expressions

    def eval(self, expr):
        try:
            return self._eval(expr)
        except NeptError as e:
            raise e.locate(expr.pos.line, expr.pos.column) if expr.pos.line else e

    def _eval(self, expr):
        if isinstance(expr, nodes.Literal):
            return expr.value
        if isinstance(expr, nodes.Name):
            try:
                return self.env[expr.id]
            except KeyError:
                raise UnboundNameError(f"name '{expr.id}' is not defined")
        if isinstance(expr, nodes.ListDisplay):
            return check_homogeneous([self.eval(e) for e in expr.elements])
        if isinstance(expr, nodes.Call):
            return self.call(expr)
        if isinstance(expr, nodes.MethodCall):
            return self.method(expr)
        if isinstance(expr, nodes.UnaryOp):
            return self.unary(expr.op, self.eval(expr.operand))
        if isinstance(expr, nodes.BinOp):
            return self.binary(expr.op, self.eval(expr.left), self.eval(expr.right))
        if isinstance(expr, nodes.Index):
            return self.index(self.eval(expr.receiver), self.eval(expr.index))
        raise FlavorError(f'unsupported expression {type(expr).__name__}')

    # Builtins

    def call(self, expr: nodes.Call):
        if expr.func not in nodes.BUILTINS:
            raise FlavorError(f"unknown function '{expr.func}'")
        args = [self.eval(arg) for arg in expr.args]
        handler = getattr(self, f'builtin_{expr.func}')
        return handler(expr, args)

    def builtin_score(self, expr, args):
        if not 1 <= len(args) <= 2:
            raise FlavorError(f'score() takes a question and an arity, got {len(args)} arguments')
        question = args[0]
        num_objects = args[1] if len(args) == 2 else 1
        if not isinstance(question, str):
            raise FlavorError(f'score() question must be Text, got a {flavor(question)}')
        if not is_number(num_objects) or not isinstance(num_objects, int):
            raise FlavorError(f'score() arity must be an Integer, got a {flavor(num_objects)}')
        self.charge_call()
        site = self.site_key(expr.pos)
        data = self.grounder.score(question, num_objects)
        self.trace.append(TraceEntry(site, 'score', question, num_objects, shape=tuple(data.shape)))
        logger.debug(f'score({question!r}, {num_objects}) at {site} -> shape {data.shape}')
        return self.logic.score(data, label=site)

    def builtin_query(self, expr, args):
        if not 1 <= len(args) <= 2:
            raise FlavorError(f'query() takes a question and an optional target, got {len(args)} arguments')
        question = args[0]
        if not isinstance(question, str):
            raise FlavorError(f'query() question must be Text, got a {flavor(question)}')
        target = args[1] if len(args) == 2 else None
        if isinstance(target, SoftValue):
            if target.shape != VECTOR or target.is_count:
                raise FlavorError(f'query() target must be an object id or a soft vector, got a {flavor(target)}')
            if target.size == 0:
                raise FlavorError('query() target vector is empty')
            target = int(np.argmax(target.data))
        elif target is not None and not (is_number(target) and isinstance(target, int)):
            raise FlavorError(f'query() target must be an object id, got a {flavor(target)}')
        self.charge_call()
        site = self.site_key(expr.pos)
        answer = self.grounder.query(question, target)
        self.trace.append(TraceEntry(site, 'query', question, target=target, text=answer))
        logger.debug(f'query({question!r}, {target}) at {site} -> {answer!r}')
        return answer

    def builtin_len(self, expr, args):
        value = self._single('len', args)
        if isinstance(value, list):
            if value and all(isinstance(v, str) for v in value):
                return len(set(value))
            return len(value)
        if isinstance(value, str):
            return len(value)
        if isinstance(value, SoftValue) and value.shape == VECTOR and not value.is_count:
            return value.size
        raise FlavorError(f'len() is undefined for a {flavor(value)}')

    def builtin_str(self, expr, args):
        value = self._single('str', args)
        if isinstance(value, (bool, str)) or is_number(value):
            return str(value)
        raise FlavorError(f'str() is undefined for a {flavor(value)}')

    def builtin_int(self, expr, args):
        value = self._single('int', args)
        if isinstance(value, bool) or is_number(value):
            return int(value)
        if isinstance(value, SoftValue) and value.is_count:
            return round_half_up(value.item())
        if isinstance(value, str):
            try:
                return int(value.strip())
            except ValueError:
                raise FlavorError(f'int() cannot parse "{value}"')
        raise FlavorError(f'int() is undefined for a {flavor(value)}')

    def builtin_abs(self, expr, args):
        value = self._single('abs', args)
        if is_number(value):
            return abs(value)
        if isinstance(value, SoftValue) and value.is_count:
            return self.logic.absolute(value)
        raise FlavorError(f'abs() is undefined for a {flavor(value)}')

    @staticmethod
    def _single(name: str, args):
        if len(args) != 1:
            raise FlavorError(f'{name}() takes exactly one argument, got {len(args)}')
        return args[0]

    # Methods on soft values

    def method(self, expr: nodes.MethodCall):
        receiver = self.eval(expr.receiver)
        if not isinstance(receiver, SoftValue) or receiver.is_count:
            raise FlavorError(f'.{expr.method}() is undefined for a {flavor(receiver)}')
        if expr.method == 'implies':
            if len(expr.args) != 1:
                raise FlavorError(f'.implies() takes one argument, got {len(expr.args)}')
            other = self._soft_operand(self.eval(expr.args[0]), 'implies')
            return self.logic.connective(ops.IMPLIES, receiver, other)
        if expr.method == 'iota':
            # the optional argument names the bound variable and carries no value
            if len(expr.args) > 1:
                raise FlavorError(f'.iota() takes at most one argument, got {len(expr.args)}')
        elif expr.args:
            raise FlavorError(f'.{expr.method}() takes no arguments')
        return self.logic.quantify(expr.method, receiver)

    def _soft_operand(self, value, op: str) -> SoftValue:
        if isinstance(value, bool):
            return self.logic.constant(1.0 if value else 0.0)
        if isinstance(value, SoftValue) and not value.is_count:
            return value
        raise FlavorError(f"'{op}' is undefined for a {flavor(value)}")

    # Operators

    def unary(self, op: str, value):
        if op == nodes.NOT:
            if isinstance(value, bool):
                return not value
            if isinstance(value, SoftValue) and not value.is_count:
                return self.logic.connective(ops.NOT, value)
            raise FlavorError(f"'not' is undefined for a {flavor(value)}")
        if is_number(value):
            return -value
        if isinstance(value, SoftValue) and value.is_count:
            return self.logic.negate(value)
        raise FlavorError(f"unary '-' is undefined for a {flavor(value)}")

    def binary(self, op: str, left, right):
        if op in (nodes.AND, nodes.OR):
            return self.connective(op, left, right)
        if op in nodes.COMPARISONS:
            return self.compare(op, left, right)
        return self.arithmetic(op, left, right)

    def connective(self, op: str, left, right):
        if isinstance(left, bool) and isinstance(right, bool):
            return (left and right) if op == nodes.AND else (left or right)
        if is_soft(left) or is_soft(right):
            kind = ops.AND if op == nodes.AND else ops.OR
            return self.logic.connective(kind, self._soft_operand(left, op), self._soft_operand(right, op))
        raise FlavorError(f"'{op}' is undefined for {flavor(left)} and {flavor(right)}")

    def compare(self, op: str, left, right):
        if isinstance(left, str) and isinstance(right, str) or isinstance(left, bool) and isinstance(right, bool):
            if op == nodes.EQ:
                return left == right
            if op == nodes.NE:
                return left != right
            raise FlavorError(f"'{op}' is undefined for {flavor(left)} and {flavor(right)}")
        if is_number(left) and is_number(right):
            return {
                nodes.EQ: left == right, nodes.NE: left != right,
                nodes.LT: left < right, nodes.GT: left > right,
                nodes.LE: left <= right, nodes.GE: left >= right,
            }[op]
        operands_ok = all(is_soft_scalar(v) or is_number(v) for v in (left, right))
        if operands_ok and (is_soft(left) or is_soft(right)):
            logic = self.logic
            if op == nodes.EQ:
                return logic.soft_compare(ops.EQ, left, right)
            if op == nodes.NE:
                return logic.connective(ops.NOT, logic.soft_compare(ops.EQ, left, right))
            if op == nodes.GT:
                return logic.soft_compare(ops.GT, left, right)
            if op == nodes.LT:
                return logic.soft_compare(ops.GT, right, left)
            if op == nodes.GE:
                return logic.connective(ops.NOT, logic.soft_compare(ops.GT, right, left))
            return logic.connective(ops.NOT, logic.soft_compare(ops.GT, left, right))
        raise FlavorError(f"'{op}' is undefined for {flavor(left)} and {flavor(right)}")

    def arithmetic(self, op: str, left, right):
        if op == nodes.ADD and isinstance(left, list) and isinstance(right, list):
            return check_homogeneous(left + right)
        if is_number(left) and is_number(right):
            if op == nodes.DIV:
                if right == 0:
                    raise FlavorError('division by zero')
                return left / right
            return {nodes.ADD: left + right, nodes.SUB: left - right, nodes.MUL: left * right}[op]
        counts = [v for v in (left, right) if isinstance(v, SoftValue) and v.is_count]
        others_ok = all(is_number(v) or (isinstance(v, SoftValue) and v.is_count) for v in (left, right))
        if counts and others_ok:
            return self.logic.arithmetic(_ARITHMETIC[op], left, right)
        raise FlavorError(f"'{op}' is undefined for {flavor(left)} and {flavor(right)}")

    def index(self, receiver, index):
        if not is_number(index) or not isinstance(index, int):
            raise FlavorError(f'index must be an Integer, got a {flavor(index)}')
        if isinstance(receiver, (list, tuple)):
            if not 0 <= index < len(receiver):
                raise FlavorError(f'index {index} out of range for {describe(receiver)}')
            return receiver[index]
        if isinstance(receiver, SoftValue) and receiver.shape != SCALAR and not receiver.is_count:
            return self.logic.select(receiver, index)
        raise FlavorError(f'cannot index a {flavor(receiver)}')
