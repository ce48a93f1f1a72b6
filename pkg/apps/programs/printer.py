"""
Canonical source rendering of program ASTs.

Output uses two-space indentation, ``&``/``|`` for the connectives and the
fewest parentheses that keep the parse identical.
"""

from typing import List

from . import nodes

INDENT = '  '

_OR, _AND, _NOT, _CMP, _ADD, _MUL, _NEG, _POSTFIX, _ATOM = range(1, 10)

_BINARY_PRECEDENCE = {
    nodes.OR: _OR,
    nodes.AND: _AND,
    **{op: _CMP for op in nodes.COMPARISONS},
    nodes.ADD: _ADD,
    nodes.SUB: _ADD,
    nodes.MUL: _MUL,
    nodes.DIV: _MUL,
}

_BINARY_SYMBOL = {nodes.OR: '|', nodes.AND: '&'}

_STRING_ESCAPES = {'\\': '\\\\', '"': '\\"', '\n': '\\n', '\t': '\\t'}


def pretty_print(program: nodes.Program) -> str:
    lines: List[str] = []
    for statement in program.statements:
        _statement(statement, 0, lines)
    return ''.join(line + '\n' for line in lines)


def format_expr(expr) -> str:
    return _expr(expr, 0)


def _statement(stmt, depth: int, lines: List[str]):
    pad = INDENT * depth
    if isinstance(stmt, nodes.Assign):
        lines.append(f'{pad}{stmt.target} = {format_expr(stmt.value)}')
    elif isinstance(stmt, nodes.Return):
        lines.append(f'{pad}return {format_expr(stmt.value)}')
    elif isinstance(stmt, nodes.ExprStmt):
        lines.append(f'{pad}{format_expr(stmt.value)}')
    elif isinstance(stmt, nodes.For):
        lines.append(f'{pad}for {stmt.target} in {format_expr(stmt.iterable)}:')
        _block(stmt.body, depth + 1, lines)
    elif isinstance(stmt, nodes.If):
        lines.append(f'{pad}if {format_expr(stmt.test)}:')
        _block(stmt.body, depth + 1, lines)
        for test, body in stmt.elifs:
            lines.append(f'{pad}elif {format_expr(test)}:')
            _block(body, depth + 1, lines)
        if stmt.orelse:
            lines.append(f'{pad}else:')
            _block(stmt.orelse, depth + 1, lines)
    else:
        raise TypeError(f'not a statement: {stmt!r}')


def _block(statements, depth: int, lines: List[str]):
    for statement in statements:
        _statement(statement, depth, lines)


def _precedence(expr) -> int:
    if isinstance(expr, nodes.BinOp):
        return _BINARY_PRECEDENCE[expr.op]
    if isinstance(expr, nodes.UnaryOp):
        return _NOT if expr.op == nodes.NOT else _NEG
    if isinstance(expr, (nodes.MethodCall, nodes.Index)):
        return _POSTFIX
    return _ATOM


def _expr(expr, minimum: int) -> str:
    text = _render(expr)
    return f'({text})' if _precedence(expr) < minimum else text


def _render(expr) -> str:
    if isinstance(expr, nodes.Literal):
        return _literal(expr)
    if isinstance(expr, nodes.Name):
        return expr.id
    if isinstance(expr, nodes.BinOp):
        level = _BINARY_PRECEDENCE[expr.op]
        # comparisons do not chain, so both sides bind tighter
        left_min = level + 1 if level == _CMP else level
        symbol = _BINARY_SYMBOL.get(expr.op, expr.op)
        return f'{_expr(expr.left, left_min)} {symbol} {_expr(expr.right, level + 1)}'
    if isinstance(expr, nodes.UnaryOp):
        if expr.op == nodes.NOT:
            return f'not {_expr(expr.operand, _NOT)}'
        return f'-{_expr(expr.operand, _NEG)}'
    if isinstance(expr, nodes.MethodCall):
        args = ', '.join(_expr(arg, 0) for arg in expr.args)
        return f'{_expr(expr.receiver, _POSTFIX)}.{expr.method}({args})'
    if isinstance(expr, nodes.Index):
        return f'{_expr(expr.receiver, _POSTFIX)}[{_expr(expr.index, 0)}]'
    if isinstance(expr, nodes.Call):
        args = ', '.join(_expr(arg, 0) for arg in expr.args)
        return f'{expr.func}({args})'
    if isinstance(expr, nodes.ListDisplay):
        return '[' + ', '.join(_expr(e, 0) for e in expr.elements) + ']'
    raise TypeError(f'not an expression: {expr!r}')


def _literal(node: nodes.Literal) -> str:
    if node.kind == 'bool':
        return 'True' if node.value else 'False'
    if node.kind == 'str':
        return '"' + ''.join(_STRING_ESCAPES.get(ch, ch) for ch in node.value) + '"'
    if node.kind == 'float':
        return repr(float(node.value))
    return str(node.value)
