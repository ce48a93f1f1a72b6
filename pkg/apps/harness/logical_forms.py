"""
Logical forms of generated questions.

A logical form is a small tree over unary predicates, connectives,
relations and quantifiers. ``brute_force`` evaluates it crisply by
enumerating objects and pairs of a scene; ``to_program`` emits the
equivalent reasoning program, so the two can be checked against each
other.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple, Union

from apps.core.exceptions import GenerationError, UnknownPredicateError
from apps.grounding.oracle import ANALOGICAL, ATTRIBUTE_CATEGORIES, SPATIAL, attribute_value, unary_vocabulary
from apps.grounding.prompts import QUERY_OBJECT_PROMPT
from apps.grounding.scene import Scene
from apps.programs import nodes
from apps.programs.lexer import KEYWORDS

GREATER = 'greater'
FEWER = 'fewer'
EQUAL = 'equal'
COUNT_COMPARISONS = {GREATER: nodes.GT, FEWER: nodes.LT, EQUAL: nodes.EQ}


# Object-set forms

@dataclass(frozen=True)
class Pred:
    token: str


@dataclass(frozen=True)
class And:
    left: 'ObjectSet'
    right: 'ObjectSet'


@dataclass(frozen=True)
class Not:
    operand: 'ObjectSet'


@dataclass(frozen=True)
class Relate:
    """Objects standing in ``relation`` to at least one member of ``target``."""
    relation: str
    target: 'ObjectSet'


ObjectSet = Union[Pred, And, Not, Relate]


# Answer forms

@dataclass(frozen=True)
class Exists:
    operand: ObjectSet


@dataclass(frozen=True)
class Forall:
    restriction: ObjectSet
    body: ObjectSet


@dataclass(frozen=True)
class Count:
    operand: ObjectSet


@dataclass(frozen=True)
class CompareCount:
    comparison: str
    left: ObjectSet
    right: ObjectSet


@dataclass(frozen=True)
class QueryAttr:
    category: str
    referent: ObjectSet


@dataclass(frozen=True)
class SameAttr:
    category: str
    left: ObjectSet
    right: ObjectSet


@dataclass(frozen=True)
class Select:
    referent: ObjectSet


LogicalForm = Union[Exists, Forall, Count, CompareCount, QueryAttr, SameAttr, Select]


def conjunction(tokens) -> ObjectSet:
    tokens = list(tokens)
    if not tokens:
        raise GenerationError('a description needs at least one predicate')
    form: ObjectSet = Pred(tokens[0])
    for token in tokens[1:]:
        form = And(form, Pred(token))
    return form


# Brute-force evaluation

def objects_of(form: ObjectSet, scene: Scene) -> FrozenSet[int]:
    """Ids of the objects satisfying an object-set form."""
    everything = frozenset(range(len(scene)))
    if isinstance(form, Pred):
        token = form.token.lower()
        if token not in unary_vocabulary(scene):
            raise UnknownPredicateError(f"unsupported predicate '{form.token}'")
        return frozenset(obj.id for obj in scene.objects if obj.has(token))
    if isinstance(form, And):
        return objects_of(form.left, scene) & objects_of(form.right, scene)
    if isinstance(form, Not):
        return everything - objects_of(form.operand, scene)
    if isinstance(form, Relate):
        targets = objects_of(form.target, scene)
        return frozenset(x for x in everything if any(_related(scene, x, form.relation, y) for y in targets))
    raise GenerationError(f'not an object-set form: {form!r}')


def _related(scene: Scene, x: int, relation: str, y: int) -> bool:
    if relation in SPATIAL:
        return scene.related(x, relation, y)
    if relation in ANALOGICAL:
        category = ANALOGICAL[relation]
        value = attribute_value(scene.objects[x], category)
        return x != y and value is not None and value == attribute_value(scene.objects[y], category)
    raise UnknownPredicateError(f"unsupported relation '{relation}'")


def unique_object(form: ObjectSet, scene: Scene) -> int:
    members = objects_of(form, scene)
    if len(members) != 1:
        raise GenerationError(f'referent matches {len(members)} objects, expected exactly one')
    return next(iter(members))


def brute_force(form: LogicalForm, scene: Scene):
    """
    Crisp answer of ``form`` on ``scene``.

    Booleans for Exists/Forall/CompareCount/SameAttr, an int for Count, an
    attribute value for QueryAttr and an object id for Select. Forall over
    an empty restriction is vacuously true.
    """
    if isinstance(form, Exists):
        return bool(objects_of(form.operand, scene))
    if isinstance(form, Forall):
        return objects_of(form.restriction, scene) <= objects_of(form.body, scene)
    if isinstance(form, Count):
        return len(objects_of(form.operand, scene))
    if isinstance(form, CompareCount):
        left, right = len(objects_of(form.left, scene)), len(objects_of(form.right, scene))
        return {GREATER: left > right, FEWER: left < right, EQUAL: left == right}[form.comparison]
    if isinstance(form, QueryAttr):
        obj = scene.objects[unique_object(form.referent, scene)]
        return _attribute(obj, form.category)
    if isinstance(form, SameAttr):
        first = scene.objects[unique_object(form.left, scene)]
        second = scene.objects[unique_object(form.right, scene)]
        return _attribute(first, form.category) == _attribute(second, form.category)
    if isinstance(form, Select):
        return unique_object(form.referent, scene)
    raise GenerationError(f'not a logical form: {form!r}')


def _attribute(obj, category: str) -> str:
    if category not in ATTRIBUTE_CATEGORIES:
        raise UnknownPredicateError(f"unsupported attribute category '{category}'")
    value = attribute_value(obj, category)
    if value is None:
        raise GenerationError(f'object {obj.id} has no {category}')
    return value


def ground_truth(form: LogicalForm, scene: Scene):
    """Brute-force answer in corpus form: yes/no, counts, values or an object with its box."""
    answer = brute_force(form, scene)
    if isinstance(form, Select):
        return {'object': answer, 'box': list(scene.objects[answer].box)}
    if isinstance(answer, bool):
        return 'yes' if answer else 'no'
    return answer


# Program emission

class ProgramBuilder:
    """
    Emits a program equivalent to a logical form.

    Every distinct predicate becomes one ``score`` assignment, named after
    the predicate; the answer expression is returned on the last line.
    """

    def __init__(self):
        self.statements: List[nodes.Stmt] = []
        self.names: Dict[Tuple[str, int], str] = {}

    def build(self, form: LogicalForm) -> nodes.Program:
        answer = self.answer(form)
        return nodes.Program(tuple(self.statements) + (nodes.Return(answer),))

    def predicate(self, token: str, num_objects: int) -> nodes.Name:
        key = (token, num_objects)
        if key not in self.names:
            name = token.replace(' ', '_')
            if name in KEYWORDS or name in nodes.BUILTINS or name in self.names.values():
                name = f'{name}_{num_objects}'
            self.names[key] = name
            call = nodes.Call('score', (nodes.literal(token), nodes.literal(num_objects)))
            self.statements.append(nodes.Assign(name, call))
        return nodes.Name(self.names[key])

    def objects(self, form: ObjectSet) -> nodes.Expr:
        if isinstance(form, Pred):
            return self.predicate(form.token, 1)
        if isinstance(form, And):
            return nodes.BinOp(nodes.AND, self.objects(form.left), self.objects(form.right))
        if isinstance(form, Not):
            return nodes.UnaryOp(nodes.NOT, self.objects(form.operand))
        if isinstance(form, Relate):
            return nodes.BinOp(nodes.AND, self.objects(form.target), self.predicate(form.relation, 2))
        raise GenerationError(f'not an object-set form: {form!r}')

    def answer(self, form: LogicalForm) -> nodes.Expr:
        if isinstance(form, Exists):
            return nodes.MethodCall(self.objects(form.operand), 'exists')
        if isinstance(form, Forall):
            implication = nodes.MethodCall(self.objects(form.restriction), 'implies', (self.objects(form.body),))
            return nodes.MethodCall(implication, 'forall')
        if isinstance(form, Count):
            return nodes.MethodCall(self.objects(form.operand), 'count')
        if isinstance(form, CompareCount):
            left = nodes.MethodCall(self.objects(form.left), 'count')
            right = nodes.MethodCall(self.objects(form.right), 'count')
            return nodes.BinOp(COUNT_COMPARISONS[form.comparison], left, right)
        if isinstance(form, QueryAttr):
            return self.query(form.category, form.referent)
        if isinstance(form, SameAttr):
            return nodes.BinOp(nodes.EQ, self.query(form.category, form.left), self.query(form.category, form.right))
        if isinstance(form, Select):
            return self.objects(form.referent)
        raise GenerationError(f'not a logical form: {form!r}')

    def query(self, category: str, referent: ObjectSet) -> nodes.Call:
        question = QUERY_OBJECT_PROMPT.format(category=category)
        target = nodes.MethodCall(self.objects(referent), 'iota')
        return nodes.Call('query', (nodes.literal(question), target))


def to_program(form: LogicalForm) -> nodes.Program:
    return ProgramBuilder().build(form)
