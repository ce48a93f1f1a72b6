"""
Tokenizer for the reasoning-program language.

Indentation is significant: leading spaces open and close blocks through
INDENT/DEDENT tokens, tabs in indentation are rejected. Inside brackets
line breaks are ignored. Spans are character offsets into the source.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Tuple

from apps.core.exceptions import ProgramSyntaxError

MAX_SOURCE_BYTES = 64 * 1024

KEYWORDS = frozenset({
    'if', 'elif', 'else', 'for', 'in', 'return', 'not', 'and', 'or', 'True', 'False',
})

_TOKEN_RE = re.compile(r'''
    (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|[&|=<>+\-*/.,()\[\]:])
''', re.VERBOSE)

_ESCAPES = {'"': '"', '\\': '\\', 'n': '\n', 't': '\t'}
_OPENERS = {'(', '['}
_CLOSERS = {')', ']'}


class TokenKind(str, Enum):
    IDENT = 'ident'
    INT = 'int'
    FLOAT = 'float'
    STR = 'str'
    KEYWORD = 'keyword'
    OP = 'op'
    NEWLINE = 'newline'
    INDENT = 'indent'
    DEDENT = 'dedent'
    EOF = 'eof'


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: Tuple[int, int]
    line: int
    column: int
    value: Any = None

    def is_op(self, *texts) -> bool:
        return self.kind == TokenKind.OP and self.text in texts

    def is_keyword(self, *words) -> bool:
        return self.kind == TokenKind.KEYWORD and self.text in words

    def describe(self) -> str:
        if self.kind in (TokenKind.NEWLINE, TokenKind.INDENT, TokenKind.DEDENT):
            return {'newline': 'end of line', 'indent': 'indent', 'dedent': 'dedent'}[self.kind.value]
        if self.kind == TokenKind.EOF:
            return 'end of file'
        return f"'{self.text}'"


def tokenize(source: str) -> List[Token]:
    """Split ``source`` into tokens, ending with a single EOF token."""
    if len(source.encode('utf-8')) > MAX_SOURCE_BYTES:
        raise ProgramSyntaxError(f'program exceeds {MAX_SOURCE_BYTES} bytes', 1, 1, (0, 0))
    return _Lexer(source).run()


class _Lexer:

    def __init__(self, source: str):
        self.source = source
        self.tokens: List[Token] = []
        self.indents = [0]
        self.brackets: List[Token] = []

    def error(self, message: str, line: int, column: int, start: int):
        raise ProgramSyntaxError(message, line, column, (start, start + 1))

    def emit(self, kind, start, end, line, column, value=None):
        self.tokens.append(Token(kind, self.source[start:end], (start, end), line, column, value))

    def run(self) -> List[Token]:
        source = self.source
        offset = 0
        line_no = 0
        while offset < len(source):
            line_no += 1
            newline_at = source.find('\n', offset)
            end = len(source) if newline_at == -1 else newline_at
            self.scan_line(offset, end, line_no, has_newline=newline_at != -1)
            offset = end + 1

        eof = len(source)
        if self.brackets:
            opener = self.brackets[-1]
            raise ProgramSyntaxError(f"'{opener.text}' was never closed", opener.line, opener.column, opener.span)
        eof_line = source.count('\n') + 1
        eof_column = eof - source.rfind('\n')
        if self.tokens and self.tokens[-1].kind not in (TokenKind.NEWLINE, TokenKind.DEDENT):
            self.emit(TokenKind.NEWLINE, eof, eof, eof_line, eof_column)
        while len(self.indents) > 1:
            self.indents.pop()
            self.emit(TokenKind.DEDENT, eof, eof, eof_line, eof_column)
        self.emit(TokenKind.EOF, eof, eof, eof_line, eof_column)
        return self.tokens

    def scan_line(self, start: int, end: int, line_no: int, has_newline: bool):
        source = self.source
        pos = start
        if not self.brackets:
            while pos < end and source[pos] in ' \t':
                if source[pos] == '\t':
                    self.error('tab in indentation', line_no, pos - start + 1, pos)
                pos += 1
            rest = source[pos:end].rstrip('\r')
            if not rest.strip() or rest.lstrip().startswith('#'):
                return
            self.indent_to(pos - start, start, pos, line_no)

        while pos < end:
            char = source[pos]
            column = pos - start + 1
            if char in ' \t\r':
                pos += 1
            elif char == '#':
                break
            elif char == '"':
                pos = self.scan_string(pos, end, line_no, column)
            else:
                match = _TOKEN_RE.match(source, pos, end)
                if match is None:
                    self.error(f"illegal character '{char}'", line_no, column, pos)
                text = match.group()
                kind = match.lastgroup
                if kind == 'float':
                    self.emit(TokenKind.FLOAT, pos, match.end(), line_no, column, float(text))
                elif kind == 'int':
                    self.emit(TokenKind.INT, pos, match.end(), line_no, column, int(text))
                elif kind == 'name':
                    token_kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
                    self.emit(token_kind, pos, match.end(), line_no, column, text)
                else:
                    self.emit(TokenKind.OP, pos, match.end(), line_no, column, text)
                    self.track_bracket(self.tokens[-1])
                pos = match.end()

        if has_newline and not self.brackets:
            newline_start = end - 1 if end > start and source[end - 1] == '\r' else end
            if self.tokens and self.tokens[-1].kind not in (TokenKind.NEWLINE,):
                self.emit(TokenKind.NEWLINE, newline_start, end + 1, line_no, newline_start - start + 1)

    def indent_to(self, width: int, line_start: int, pos: int, line_no: int):
        if width > self.indents[-1]:
            self.indents.append(width)
            self.emit(TokenKind.INDENT, line_start, pos, line_no, 1)
            return
        while width < self.indents[-1]:
            self.indents.pop()
            self.emit(TokenKind.DEDENT, pos, pos, line_no, width + 1)
        if width != self.indents[-1]:
            self.error('unindent does not match any outer indentation level', line_no, width + 1, pos)

    def track_bracket(self, token: Token):
        if token.text in _OPENERS:
            self.brackets.append(token)
        elif token.text in _CLOSERS:
            if not self.brackets:
                self.error(f"unmatched '{token.text}'", token.line, token.column, token.span[0])
            opener = self.brackets.pop()
            if (opener.text, token.text) not in (('(', ')'), ('[', ']')):
                self.error(f"'{token.text}' does not match '{opener.text}'", token.line, token.column, token.span[0])

    def scan_string(self, start: int, end: int, line_no: int, column: int) -> int:
        source = self.source
        chars = []
        pos = start + 1
        while pos < end:
            char = source[pos]
            if char == '"':
                self.emit(TokenKind.STR, start, pos + 1, line_no, column, ''.join(chars))
                return pos + 1
            if char == '\\' and pos + 1 < end:
                escaped = source[pos + 1]
                chars.append(_ESCAPES.get(escaped, '\\' + escaped))
                pos += 2
                continue
            chars.append(char)
            pos += 1
        self.error('unterminated string literal', line_no, column, start)
