"""
Recursive-descent parser for reasoning programs.

Precedence, lowest first: ``or``/``|``, ``and``/``&``, ``not``,
comparisons (non-chaining), ``+ -``, ``* /``, unary minus, postfix
(method call, index). Function calls are restricted to the builtin set,
method calls to the quantifier set.
"""

import logging
from contextlib import contextmanager
from typing import List, Optional, Tuple

from apps.core.exceptions import ProgramSyntaxError
from . import nodes
from .lexer import Token, TokenKind, tokenize

logger = logging.getLogger(__name__)

MAX_DEPTH = 64

_COMPARISON_OPS = {'==', '!=', '<', '>', '<=', '>='}


def parse(tokens: List[Token]) -> nodes.Program:
    """Parse a token stream ending with EOF into a Program."""
    if not tokens or tokens[-1].kind != TokenKind.EOF:
        raise ProgramSyntaxError('token stream does not end with end of file', 1, 1, (0, 0))
    return Parser(tokens).program()


def parse_source(source: str) -> nodes.Program:
    return parse(tokenize(source))


def _pos(token: Token, end: Optional[int] = None) -> nodes.Position:
    return nodes.Position(token.line, token.column, token.span[0],
                          token.span[1] if end is None else end)


def _span(first: nodes.Position, last) -> nodes.Position:
    return nodes.Position(first.line, first.column, first.start, last.pos.end)


class Parser:

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.index = 0
        self.depth = 0

    # Token helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.current
        if token.kind != TokenKind.EOF:
            self.index += 1
        return token

    def error(self, message: str, token: Optional[Token] = None):
        token = token or self.current
        raise ProgramSyntaxError(message, token.line, token.column, token.span)

    def expect_op(self, text: str) -> Token:
        if not self.current.is_op(text):
            self.error(f"expected '{text}', found {self.current.describe()}")
        return self.advance()

    def expect_kind(self, kind: TokenKind, what: str) -> Token:
        if self.current.kind != kind:
            self.error(f'expected {what}, found {self.current.describe()}')
        return self.advance()

    @contextmanager
    def nested(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.error(f'nesting deeper than {MAX_DEPTH} levels')
        try:
            yield
        finally:
            self.depth -= 1

    # Statements

    def program(self) -> nodes.Program:
        statements = []
        while self.current.kind != TokenKind.EOF:
            if self.current.kind == TokenKind.NEWLINE:
                self.advance()
                continue
            if self.current.kind == TokenKind.INDENT:
                self.error('unexpected indent')
            statements.append(self.statement())
        return nodes.Program(tuple(statements))

    def statement(self):
        token = self.current
        if token.is_keyword('if'):
            return self.if_statement()
        if token.is_keyword('for'):
            return self.for_statement()
        if token.is_keyword('return'):
            self.advance()
            value = self.expression()
            self.end_of_statement()
            return nodes.Return(value, pos=_span(_pos(token), value))
        if token.is_keyword('elif', 'else'):
            self.error(f"'{token.text}' without a matching 'if'")
        if token.kind == TokenKind.IDENT and self.peek().is_op('='):
            self.advance()
            self.advance()
            value = self.expression()
            self.end_of_statement()
            return nodes.Assign(token.text, value, pos=_span(_pos(token), value))
        value = self.expression()
        self.end_of_statement()
        return nodes.ExprStmt(value, pos=value.pos)

    def end_of_statement(self):
        if self.current.is_op('='):
            self.error('can only assign to a plain name')
        if self.current.kind not in (TokenKind.NEWLINE, TokenKind.EOF):
            self.error(f'expected end of line, found {self.current.describe()}')
        if self.current.kind == TokenKind.NEWLINE:
            self.advance()

    def block(self) -> Tuple:
        self.expect_op(':')
        self.expect_kind(TokenKind.NEWLINE, 'end of line after \':\'')
        if self.current.kind != TokenKind.INDENT:
            self.error('expected indented block')
        self.advance()
        statements = []
        with self.nested():
            while self.current.kind not in (TokenKind.DEDENT, TokenKind.EOF):
                statements.append(self.statement())
        self.expect_kind(TokenKind.DEDENT, 'dedent')
        return tuple(statements)

    def if_statement(self) -> nodes.If:
        start = self.advance()
        test = self.expression()
        body = self.block()
        elifs = []
        orelse: Tuple = ()
        while self.current.is_keyword('elif'):
            self.advance()
            elif_test = self.expression()
            elifs.append((elif_test, self.block()))
        if self.current.is_keyword('else'):
            self.advance()
            orelse = self.block()
        return nodes.If(test, body, tuple(elifs), orelse, pos=_pos(start, test.pos.end))

    def for_statement(self) -> nodes.For:
        start = self.advance()
        target = self.expect_kind(TokenKind.IDENT, 'loop variable')
        if not self.current.is_keyword('in'):
            self.error(f"expected 'in', found {self.current.describe()}")
        self.advance()
        iterable = self.expression()
        body = self.block()
        return nodes.For(target.text, iterable, body, pos=_pos(start, iterable.pos.end))

    # Expressions

    def expression(self):
        with self.nested():
            return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.current.is_keyword('or') or self.current.is_op('|'):
            token = self.advance()
            right = self.and_expr()
            left = nodes.BinOp(nodes.OR, left, right, pos=self.binop_pos(token, left, right))
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.current.is_keyword('and') or self.current.is_op('&'):
            token = self.advance()
            right = self.not_expr()
            left = nodes.BinOp(nodes.AND, left, right, pos=self.binop_pos(token, left, right))
        return left

    def not_expr(self):
        if self.current.is_keyword('not'):
            token = self.advance()
            with self.nested():
                operand = self.not_expr()
            return nodes.UnaryOp(nodes.NOT, operand, pos=_pos(token, operand.pos.end))
        return self.comparison()

    def comparison(self):
        left = self.additive()
        if self.current.kind == TokenKind.OP and self.current.text in _COMPARISON_OPS:
            token = self.advance()
            right = self.additive()
            if self.current.kind == TokenKind.OP and self.current.text in _COMPARISON_OPS:
                self.error('comparison chaining is not supported')
            return nodes.BinOp(token.text, left, right, pos=self.binop_pos(token, left, right))
        return left

    def additive(self):
        left = self.multiplicative()
        while self.current.is_op('+', '-'):
            token = self.advance()
            right = self.multiplicative()
            left = nodes.BinOp(token.text, left, right, pos=self.binop_pos(token, left, right))
        return left

    def multiplicative(self):
        left = self.unary()
        while self.current.is_op('*', '/'):
            token = self.advance()
            right = self.unary()
            left = nodes.BinOp(token.text, left, right, pos=self.binop_pos(token, left, right))
        return left

    def unary(self):
        if self.current.is_op('-'):
            token = self.advance()
            with self.nested():
                operand = self.unary()
            return nodes.UnaryOp(nodes.NEG, operand, pos=_pos(token, operand.pos.end))
        return self.postfix()

    def postfix(self):
        expr = self.atom()
        while True:
            if self.current.is_op('.'):
                self.advance()
                name = self.expect_kind(TokenKind.IDENT, 'method name')
                if name.text not in nodes.METHODS:
                    self.error(f"unknown method '{name.text}'", name)
                args, close = self.arguments()
                expr = nodes.MethodCall(expr, name.text, args, pos=_pos(name, close.span[1]))
            elif self.current.is_op('['):
                self.advance()
                index = self.expression()
                close = self.expect_op(']')
                expr = nodes.Index(expr, index, pos=expr.pos._replace(end=close.span[1]))
            elif self.current.is_op('('):
                self.error('only builtin functions can be called')
            else:
                return expr

    def arguments(self) -> Tuple[Tuple, Token]:
        self.expect_op('(')
        args = []
        while not self.current.is_op(')'):
            args.append(self.expression())
            if not self.current.is_op(','):
                break
            self.advance()
        close = self.expect_op(')')
        return tuple(args), close

    def atom(self):
        token = self.current
        if token.kind in (TokenKind.INT, TokenKind.FLOAT, TokenKind.STR):
            self.advance()
            kind = {TokenKind.INT: 'int', TokenKind.FLOAT: 'float', TokenKind.STR: 'str'}[token.kind]
            return nodes.Literal(token.value, kind, pos=_pos(token))
        if token.is_keyword('True', 'False'):
            self.advance()
            return nodes.Literal(token.text == 'True', 'bool', pos=_pos(token))
        if token.kind == TokenKind.IDENT:
            self.advance()
            if self.current.is_op('('):
                if token.text not in nodes.BUILTINS:
                    self.error(f"unknown function '{token.text}'", token)
                args, close = self.arguments()
                return nodes.Call(token.text, args, pos=_pos(token, close.span[1]))
            return nodes.Name(token.text, pos=_pos(token))
        if token.is_op('('):
            self.advance()
            expr = self.expression()
            self.expect_op(')')
            return expr
        if token.is_op('['):
            self.advance()
            elements = []
            while not self.current.is_op(']'):
                elements.append(self.expression())
                if not self.current.is_op(','):
                    break
                self.advance()
            close = self.expect_op(']')
            return nodes.ListDisplay(tuple(elements), pos=_pos(token, close.span[1]))
        self.error(f'expected an expression, found {token.describe()}')

    @staticmethod
    def binop_pos(token: Token, left, right) -> nodes.Position:
        return nodes.Position(token.line, token.column, left.pos.start, right.pos.end)

