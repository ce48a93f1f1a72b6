"""
AST of the reasoning-program language.

Nodes are frozen dataclasses; source positions are excluded from equality
so a re-parsed pretty-printed program compares equal to the original.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple, Union


class Position(NamedTuple):
    line: int = 0
    column: int = 0
    start: int = 0
    end: int = 0


NO_POSITION = Position()


def _position():
    return field(default=NO_POSITION, compare=False, repr=False, kw_only=True)


# Operators
AND = 'and'
OR = 'or'
NOT = 'not'
NEG = '-'
EQ = '=='
NE = '!='
LT = '<'
GT = '>'
LE = '<='
GE = '>='
ADD = '+'
SUB = '-'
MUL = '*'
DIV = '/'

COMPARISONS = (EQ, NE, LT, GT, LE, GE)

METHODS = frozenset({'exists', 'forall', 'count', 'iota', 'implies'})
BUILTINS = frozenset({'score', 'query', 'len', 'str', 'int', 'abs'})


# Expressions

@dataclass(frozen=True)
class Literal:
    value: Union[int, float, str, bool]
    kind: str
    pos: Position = _position()


@dataclass(frozen=True)
class Name:
    id: str
    pos: Position = _position()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: 'Expr'
    right: 'Expr'
    pos: Position = _position()


@dataclass(frozen=True)
class UnaryOp:
    op: str
    operand: 'Expr'
    pos: Position = _position()


@dataclass(frozen=True)
class MethodCall:
    receiver: 'Expr'
    method: str
    args: Tuple['Expr', ...] = ()
    pos: Position = _position()


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple['Expr', ...] = ()
    pos: Position = _position()


@dataclass(frozen=True)
class ListDisplay:
    elements: Tuple['Expr', ...] = ()
    pos: Position = _position()


@dataclass(frozen=True)
class Index:
    receiver: 'Expr'
    index: 'Expr'
    pos: Position = _position()


Expr = Union[Literal, Name, BinOp, UnaryOp, MethodCall, Call, ListDisplay, Index]


# Statements

@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    pos: Position = _position()


@dataclass(frozen=True)
class If:
    test: Expr
    body: Tuple['Stmt', ...]
    elifs: Tuple[Tuple[Expr, Tuple['Stmt', ...]], ...] = ()
    orelse: Tuple['Stmt', ...] = ()
    pos: Position = _position()


@dataclass(frozen=True)
class For:
    target: str
    iterable: Expr
    body: Tuple['Stmt', ...]
    pos: Position = _position()


@dataclass(frozen=True)
class Return:
    value: Expr
    pos: Position = _position()


@dataclass(frozen=True)
class ExprStmt:
    value: Expr
    pos: Position = _position()


Stmt = Union[Assign, If, For, Return, ExprStmt]


@dataclass(frozen=True)
class Program:
    statements: Tuple[Stmt, ...] = ()


def literal(value) -> Literal:
    """Literal node with its kind inferred from the Python value."""
    if isinstance(value, bool):
        return Literal(value, 'bool')
    if isinstance(value, int):
        return Literal(value, 'int')
    if isinstance(value, float):
        return Literal(value, 'float')
    if isinstance(value, str):
        return Literal(value, 'str')
    raise TypeError(f'unsupported literal {value!r}')


def position_of(node) -> Optional[Position]:
    pos = getattr(node, 'pos', None)
    return None if pos is None or pos == NO_POSITION else pos
