"""
Tests for the program language: tokenizer, parser, AST equality and the
canonical printer.
"""

import json
import random
import re

from django.test import SimpleTestCase

from apps.core.exceptions import GenerationError, ProgramSyntaxError
from apps.harness.questions import ALL_CATEGORIES, gen_question
from apps.harness.scenes import gen_scene
from apps.programs import nodes
from apps.programs.lexer import MAX_SOURCE_BYTES, TokenKind, tokenize
from apps.programs.nodes import BinOp, Call, Literal, MethodCall, Name, Program, Return, UnaryOp
from apps.programs.parser import MAX_DEPTH, parse, parse_source
from apps.programs.printer import format_expr, pretty_print
from tests.base import FIXTURES_DIR, PROGRAMS_DIR


def kinds(source):
    return [token.kind for token in tokenize(source)]


def returned(source):
    """Expression of the single return statement in ``source``."""
    statement, = parse_source(source).statements
    return statement.value


_COMMENT = re.compile(r'#[^\n]*')


def rebuild(test, source):
    """
    Joins the source back together from token texts and the gaps between
    them, checking that each gap is only whitespace or comments.
    """
    pieces, cursor = [], 0
    for token in tokenize(source):
        start, end = token.span
        test.assertEqual(token.text, source[start:end])
        test.assertGreaterEqual(start, cursor, token)
        if start == end:
            continue
        gap = source[cursor:start]
        test.assertEqual(_COMMENT.sub('', gap).strip(' \t\r\n'), '', repr(gap))
        pieces.extend((gap, token.text))
        cursor = end
    tail = source[cursor:]
    test.assertEqual(_COMMENT.sub('', tail).strip(' \t\r\n'), '', repr(tail))
    pieces.append(tail)
    return ''.join(pieces)


class RandomProgram:
    """Seeded generator of well-formed program ASTs."""

    NAMES = ('a', 'b', 'x1', 'objs', 'red_things', 'total', 'best')
    WORDS = ('red', 'cube', 'left of', 'a"b', 'back\\slash', 'two\nlines', 'tab\there', '')
    METHOD_ARITY = {'exists': 0, 'forall': 0, 'count': 0, 'iota': 0, 'implies': 1}
    CALL_ARITY = {'score': 2, 'query': 2, 'len': 1, 'str': 1, 'int': 1, 'abs': 1}
    OPERATORS = (nodes.AND, nodes.OR, *nodes.COMPARISONS, nodes.ADD, nodes.SUB, nodes.MUL, nodes.DIV)

    def __init__(self, seed):
        self.rng = random.Random(seed)

    def program(self):
        return Program(self.block(0, self.rng.randint(1, 5)))

    def block(self, depth, size=None):
        size = size or self.rng.randint(1, 3)
        return tuple(self.statement(depth) for _ in range(size))

    def statement(self, depth):
        choice = self.rng.random()
        if depth < 2 and choice < 0.15:
            elifs = tuple((self.expr(2), self.block(depth + 1)) for _ in range(self.rng.randint(0, 2)))
            orelse = self.block(depth + 1) if self.rng.random() < 0.5 else ()
            return nodes.If(self.expr(2), self.block(depth + 1), elifs, orelse)
        if depth < 2 and choice < 0.3:
            return nodes.For(self.rng.choice(self.NAMES), self.expr(2), self.block(depth + 1))
        if choice < 0.6:
            return nodes.Assign(self.rng.choice(self.NAMES), self.expr(3))
        if choice < 0.8:
            return nodes.Return(self.expr(3))
        return nodes.ExprStmt(self.expr(3))

    def expr(self, depth):
        if depth <= 0 or self.rng.random() < 0.25:
            return self.leaf()
        choice = self.rng.random()
        if choice < 0.35:
            return BinOp(self.rng.choice(self.OPERATORS), self.expr(depth - 1), self.expr(depth - 1))
        if choice < 0.45:
            return UnaryOp(self.rng.choice((nodes.NOT, nodes.NEG)), self.expr(depth - 1))
        if choice < 0.65:
            method = self.rng.choice(sorted(self.METHOD_ARITY))
            args = tuple(self.expr(depth - 1) for _ in range(self.METHOD_ARITY[method]))
            return MethodCall(self.expr(depth - 1), method, args)
        if choice < 0.8:
            func = self.rng.choice(sorted(self.CALL_ARITY))
            return Call(func, tuple(self.expr(depth - 1) for _ in range(self.CALL_ARITY[func])))
        if choice < 0.9:
            return nodes.Index(self.expr(depth - 1), self.expr(depth - 1))
        return nodes.ListDisplay(tuple(self.expr(depth - 1) for _ in range(self.rng.randint(0, 3))))

    def leaf(self):
        choice = self.rng.random()
        if choice < 0.35:
            return Name(self.rng.choice(self.NAMES))
        if choice < 0.55:
            return Literal(self.rng.randint(0, 50), 'int')
        if choice < 0.7:
            return Literal(round(self.rng.uniform(0.0, 10.0), 3), 'float')
        if choice < 0.9:
            return Literal(self.rng.choice(self.WORDS), 'str')
        return Literal(self.rng.random() < 0.5, 'bool')


class LexerTest(SimpleTestCase):

    def test_simple_statement(self):
        tokens = tokenize('x = score("red", 1)\n')
        self.assertEqual([t.text for t in tokens[:-2]], ['x', '=', 'score', '(', '"red"', ',', '1', ')'])
        self.assertEqual(tokens[4].value, 'red')
        self.assertEqual(tokens[6].value, 1)
        self.assertEqual(tokens[-2].kind, TokenKind.NEWLINE)
        self.assertEqual(tokens[-1].kind, TokenKind.EOF)

    def test_positions_and_spans(self):
        tokens = tokenize('a = 1\nreturn a & b\n')
        amp = next(t for t in tokens if t.text == '&')
        self.assertEqual((amp.line, amp.column), (2, 10))
        self.assertEqual(amp.span, (15, 16))

    def test_keywords_and_identifiers(self):
        tokens = tokenize('if not x and True: return y or False\n')
        keywords = [t.text for t in tokens if t.kind == TokenKind.KEYWORD]
        self.assertEqual(keywords, ['if', 'not', 'and', 'True', 'return', 'or', 'False'])
        idents = [t.text for t in tokens if t.kind == TokenKind.IDENT]
        self.assertEqual(idents, ['x', 'y'])

    def test_numbers(self):
        tokens = tokenize('return 3 + 0.25 * 2e3 - 1.5E-2\n')
        numbers = [(t.kind, t.value) for t in tokens if t.kind in (TokenKind.INT, TokenKind.FLOAT)]
        self.assertEqual(numbers, [
            (TokenKind.INT, 3), (TokenKind.FLOAT, 0.25), (TokenKind.FLOAT, 2000.0), (TokenKind.FLOAT, 0.015),
        ])

    def test_string_escapes(self):
        token = tokenize(r'return "a \"b\" \\ c\n\t"')[1]
        self.assertEqual(token.kind, TokenKind.STR)
        self.assertEqual(token.value, 'a "b" \\ c\n\t')

    def test_two_character_operators(self):
        ops = [t.text for t in tokenize('a == b != c <= d >= e < f > g\n') if t.kind == TokenKind.OP]
        self.assertEqual(ops, ['==', '!=', '<=', '>=', '<', '>'])

    def test_indent_and_dedent(self):
        source = 'if a:\n  if b:\n    return 1\nreturn 2\n'
        self.assertEqual(kinds(source).count(TokenKind.INDENT), 2)
        self.assertEqual(kinds(source).count(TokenKind.DEDENT), 2)

    def test_dedents_at_end_of_file(self):
        tail = kinds('if a:\n  return 1')[-3:]
        self.assertEqual(tail, [TokenKind.NEWLINE, TokenKind.DEDENT, TokenKind.EOF])

    def test_comments_and_blank_lines(self):
        source = '# header\n\nx = 1  # trailing\n    # indented comment\n\nreturn x\n'
        self.assertNotIn(TokenKind.INDENT, kinds(source))
        self.assertEqual(kinds(source).count(TokenKind.NEWLINE), 2)

    def test_line_breaks_inside_brackets(self):
        source = 'x = [\n  1,\n      2,\n]\nreturn x\n'
        self.assertNotIn(TokenKind.INDENT, kinds(source))
        self.assertEqual(kinds(source).count(TokenKind.NEWLINE), 2)

    def test_crlf_line_endings(self):
        self.assertEqual(parse_source('x = 1\r\nreturn x\r\n'), parse_source('x = 1\nreturn x\n'))

    def test_tab_in_indentation(self):
        with self.assertRaises(ProgramSyntaxError) as caught:
            tokenize('if a:\n  \treturn 1\n')
        self.assertEqual((caught.exception.line, caught.exception.column), (2, 3))

    def test_tab_inside_line_is_whitespace(self):
        self.assertEqual(parse_source('return\t1\n'), parse_source('return 1\n'))

    def test_source_size_limit(self):
        tokenize('#' * MAX_SOURCE_BYTES)
        with self.assertRaises(ProgramSyntaxError) as caught:
            tokenize('#' * (MAX_SOURCE_BYTES + 1))
        self.assertEqual((caught.exception.line, caught.exception.column), (1, 1))

    def test_empty_source(self):
        self.assertEqual(kinds(''), [TokenKind.EOF])
        self.assertEqual(parse_source('\n\n# nothing\n'), Program(()))

    def test_spans_rebuild_the_source(self):
        sources = [
            'x = [1,\n     2]  # trailing\n\n# comment only\nif x:\r\n  return\tx[0]\r\n',
            'for o in score("red", 1):\n  if o.exists():\n    a = -1.5e3\n\n  return "q\\"t"\n',
        ]
        sources += [path.read_text(encoding='utf-8') for path in sorted(PROGRAMS_DIR.glob('*.prog'))]
        sources += [pretty_print(RandomProgram(seed).program()) for seed in range(50)]
        for number, source in enumerate(sources):
            with self.subTest(number):
                self.assertEqual(rebuild(self, source), source)


class ParserTest(SimpleTestCase):

    def test_connective_precedence(self):
        self.assertEqual(
            returned('return a | b & not c\n'),
            BinOp(nodes.OR, Name('a'), BinOp(nodes.AND, Name('b'), UnaryOp(nodes.NOT, Name('c')))),
        )

    def test_keyword_and_symbol_connectives_agree(self):
        self.assertEqual(parse_source('return a or b and c\n'), parse_source('return a | b & c\n'))

    def test_not_binds_looser_than_comparison(self):
        self.assertEqual(
            returned('return not a == b\n'),
            UnaryOp(nodes.NOT, BinOp(nodes.EQ, Name('a'), Name('b'))),
        )

    def test_arithmetic_precedence_and_associativity(self):
        self.assertEqual(
            returned('return 1 - 2 - 3 * 4\n'),
            BinOp(nodes.SUB, BinOp(nodes.SUB, Literal(1, 'int'), Literal(2, 'int')),
                  BinOp(nodes.MUL, Literal(3, 'int'), Literal(4, 'int'))),
        )

    def test_unary_minus_is_not_folded(self):
        self.assertEqual(returned('return -2\n'), UnaryOp(nodes.NEG, Literal(2, 'int')))

    def test_method_calls_and_builtins(self):
        self.assertEqual(
            returned('return score("red", 1).count() > 2\n'),
            BinOp(nodes.GT, MethodCall(Call('score', (Literal('red', 'str'), Literal(1, 'int'))), 'count'),
                  Literal(2, 'int')),
        )

    def test_implies_takes_an_argument(self):
        self.assertEqual(
            returned('return a.implies(b).forall()\n'),
            MethodCall(MethodCall(Name('a'), 'implies', (Name('b'),)), 'forall'),
        )

    def test_index_and_list_display(self):
        self.assertEqual(
            returned('return [a, b,][0]\n'),
            nodes.Index(nodes.ListDisplay((Name('a'), Name('b'))), Literal(0, 'int')),
        )

    def test_statements(self):
        program = parse_source(
            'x = 1\n'
            'for pair in v:\n'
            '  x\n'
            'if x:\n'
            '  return 1\n'
            'elif y:\n'
            '  return 2\n'
            'else:\n'
            '  return 3\n'
        )
        assign, loop, branch = program.statements
        self.assertEqual(assign, nodes.Assign('x', Literal(1, 'int')))
        self.assertEqual(loop, nodes.For('pair', Name('v'), (nodes.ExprStmt(Name('x')),)))
        self.assertEqual(branch.test, Name('x'))
        self.assertEqual(len(branch.elifs), 1)
        self.assertEqual(branch.orelse, (Return(Literal(3, 'int')),))

    def test_positions_are_recorded_but_not_compared(self):
        first = parse_source('x = a & b\n')
        second = parse_source('\n\nx   =   a&b\n')
        self.assertEqual(first, second)
        value = first.statements[0].value
        self.assertEqual((value.pos.line, value.pos.column), (1, 7))
        self.assertEqual((value.pos.start, value.pos.end), (4, 9))
        self.assertIsNone(nodes.position_of(Name('a')))

    def test_nodes_are_frozen(self):
        with self.assertRaises(AttributeError):
            Name('a').id = 'b'

    def test_depth_limit(self):
        parse_source('return ' + '(' * (MAX_DEPTH - 2) + '1' + ')' * (MAX_DEPTH - 2) + '\n')
        with self.assertRaises(ProgramSyntaxError):
            parse_source('return ' + 'not ' * (MAX_DEPTH + 1) + 'x\n')

    def test_parse_requires_eof_terminated_stream(self):
        with self.assertRaises(ProgramSyntaxError):
            parse(tokenize('return 1\n')[:-1])

    def test_error_carries_span(self):
        with self.assertRaises(ProgramSyntaxError) as caught:
            parse_source('return foo(1)\n')
        self.assertEqual(caught.exception.span, (7, 10))
        self.assertEqual(caught.exception.exit_code, 2)
        self.assertTrue(str(caught.exception).startswith('1:8: '))


class MalformedProgramTest(SimpleTestCase):
    """Every malformed program yields a diagnostic at the expected line:column."""

    def test_malformed_table(self):
        cases = json.loads((FIXTURES_DIR / 'malformed_programs.json').read_text())
        self.assertGreaterEqual(len(cases), 20)
        for case in cases:
            with self.subTest(case['name']):
                with self.assertRaises(ProgramSyntaxError) as caught:
                    parse_source(case['source'])
                error = caught.exception
                self.assertEqual((error.line, error.column), (case['line'], case['column']), str(error))
                self.assertIn(case['message'], error.message)


class PrinterTest(SimpleTestCase):

    def test_canonical_form(self):
        source = 'x=score( "red",1 )\nif (x.exists()) :\n    return (a and b) or not c\n'
        self.assertEqual(
            pretty_print(parse_source(source)),
            'x = score("red", 1)\nif x.exists():\n  return a & b | not c\n',
        )

    def test_minimal_parentheses(self):
        cases = {
            'return (a | b) & c\n': '(a | b) & c',
            'return 1 - (2 - 3)\n': '1 - (2 - 3)',
            'return (1 - 2) - 3\n': '1 - 2 - 3',
            'return (a == b) == c\n': '(a == b) == c',
            'return (-x).count()\n': '(-x).count()',
            'return -x.count()\n': '-x.count()',
            'return not (not a)\n': 'not not a',
            'return - -x\n': '--x',
        }
        for source, expected in cases.items():
            with self.subTest(source=source):
                self.assertEqual(format_expr(returned(source)), expected)

    def test_literals(self):
        self.assertEqual(format_expr(returned('return 1e-5\n')), '1e-05')
        self.assertEqual(format_expr(returned('return 2.0\n')), '2.0')
        self.assertEqual(format_expr(returned('return True\n')), 'True')
        self.assertEqual(format_expr(nodes.literal('say "hi"\n')), '"say \\"hi\\"\\n"')

    def test_literal_helper(self):
        self.assertEqual(nodes.literal(False), Literal(False, 'bool'))
        self.assertEqual(nodes.literal(3), Literal(3, 'int'))
        with self.assertRaises(TypeError):
            nodes.literal(None)


class ProgramCorpusTest(SimpleTestCase):
    """Bundled programs all parse and survive a pretty-print round trip."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.paths = sorted(PROGRAMS_DIR.glob('*.prog'))

    def test_corpus_size(self):
        self.assertGreaterEqual(len(self.paths), 50)

    def test_round_trip(self):
        for path in self.paths:
            with self.subTest(path.name):
                program = parse_source(path.read_text(encoding='utf-8'))
                printed = pretty_print(program)
                self.assertEqual(parse_source(printed), program)
                self.assertEqual(pretty_print(parse_source(printed)), printed)

    def test_generated_programs_round_trip(self):
        for seed in range(300):
            program = RandomProgram(seed).program()
            printed = pretty_print(program)
            with self.subTest(seed=seed, source=printed):
                self.assertEqual(parse_source(printed), program)
                self.assertEqual(pretty_print(parse_source(printed)), printed)

    def test_harness_programs_round_trip(self):
        scene = gen_scene(7, 6)
        for category in ALL_CATEGORIES:
            for seed in range(10):
                try:
                    generated = gen_question(category, scene, seed)
                except GenerationError:
                    continue
                with self.subTest(category=category, seed=seed):
                    program = parse_source(generated.program)
                    self.assertEqual(pretty_print(program), generated.program)
                    self.assertEqual(parse_source(pretty_print(program)), program)
