"""
Oracle grounding: exact answers looked up in a stored scene graph.

Questions are reduced to bare predicate tokens (rendered visual-prompt
questions are inverted first) and answered crisply: 1 when the scene graph
says the predicate holds, 0 otherwise.
"""

import logging
from typing import Dict, FrozenSet, List, Optional

import numpy as np

from apps.core.exceptions import ArityMismatchError, UnknownPredicateError
from .base import Grounder
from .prompts import invert, query_category
from .scene import Scene, SceneObject, scene_objects_named

logger = logging.getLogger(__name__)

COLORS = ('gray', 'red', 'blue', 'green', 'brown', 'purple', 'cyan', 'yellow')
SHAPES = ('cube', 'sphere', 'cylinder')
SIZES = ('small', 'large')
MATERIALS = ('metal', 'rubber')

ATTRIBUTE_CATEGORIES: Dict[str, tuple] = {
    'color': COLORS,
    'shape': SHAPES,
    'size': SIZES,
    'material': MATERIALS,
}

SPATIAL = ('left', 'right', 'front', 'behind')
# Whole-image predicates every scene can answer; facts a scene lists are added to these
SCENE_FACTS = ('indoors', 'outdoors', 'daytime', 'night')
ANALOGICAL = {f'same {category}': category for category in ATTRIBUTE_CATEGORIES}

SYNONYMS = {
    'grey': 'gray',
    'ball': 'sphere',
    'block': 'cube',
    'big': 'large',
    'tiny': 'small',
    'shiny': 'metal',
    'metallic': 'metal',
    'matte': 'rubber',
    'left of': 'left',
    'to the left of': 'left',
    'right of': 'right',
    'to the right of': 'right',
    'in front of': 'front',
    'behind of': 'behind',
    **{name.replace(' ', '_'): name for name in ANALOGICAL},
}

_QUERY_CATEGORY_ALIASES = {'colour': 'color', 'class': 'class', 'object': 'class', 'kind': 'class', 'type': 'class'}


def canonical(question: str) -> str:
    token = invert(question)
    return SYNONYMS.get(token, token)


def attribute_value(obj: SceneObject, category: str) -> Optional[str]:
    """The object's value in an attribute category, or None when unknown."""
    for value in ATTRIBUTE_CATEGORIES[category]:
        if obj.has(value):
            return value
    return None


def unary_vocabulary(scene: Scene) -> FrozenSet[str]:
    words = {w for values in ATTRIBUTE_CATEGORIES.values() for w in values}
    for obj in scene.objects:
        if obj.category:
            words.add(obj.category.lower())
        words.update(a.lower() for a in obj.attributes)
    return frozenset(words)


def binary_vocabulary(scene: Scene) -> FrozenSet[str]:
    return frozenset(SPATIAL) | frozenset(ANALOGICAL) | scene.predicates()


def oracle_score(scene: Scene, question: str, num_objects: int, include_self: bool = False) -> np.ndarray:
    """
    Crisp scores for ``question`` over ``scene``.

    Arity 1 tests class and attributes per object, arity 2 tests stored
    relations or attribute equality for "same ..." predicates, arity 0
    tests scene-level facts. The diagonal of analogical matrices is 0
    unless ``include_self``.
    """
    token = canonical(question)
    n = len(scene)
    unary, binary = unary_vocabulary(scene), binary_vocabulary(scene)

    if num_objects == 1:
        if token not in unary:
            _reject(token, 1, unary, binary)
        return np.array([1.0 if obj.has(token) else 0.0 for obj in scene.objects], dtype=np.float64).reshape(n)

    if num_objects == 2:
        if token not in binary:
            _reject(token, 2, unary, binary)
        matrix = np.zeros((n, n), dtype=np.float64)
        if token in ANALOGICAL:
            category = ANALOGICAL[token]
            values = [attribute_value(obj, category) for obj in scene.objects]
            for x in range(n):
                for y in range(n):
                    if (x != y or include_self) and values[x] is not None and values[x] == values[y]:
                        matrix[x, y] = 1.0
        else:
            for subject, predicate, target in scene.relations:
                if predicate == token:
                    matrix[subject, target] = 1.0
        return matrix

    if token in {fact.lower() for fact in scene.facts}:
        return np.array(1.0)
    if token in unary or token in binary:
        raise ArityMismatchError(f"'{token}' is an object predicate, not a whole-image fact")
    if token in SCENE_FACTS:
        return np.array(0.0)
    raise UnknownPredicateError(f"unknown predicate '{token}'")


def _reject(token: str, num_objects: int, unary, binary):
    other = binary if num_objects == 1 else unary
    if token in other:
        wanted = 2 if num_objects == 1 else 1
        raise ArityMismatchError(f"'{token}' takes num_objects={wanted}, got {num_objects}")
    raise UnknownPredicateError(f"unknown predicate '{token}'")


class OracleGrounder(Grounder):
    """Scene-graph lookup; immutable after construction and safe to share."""

    name = 'oracle'

    def __init__(self, scene: Scene, include_self: bool = False):
        super().__init__(scene)
        self.include_self = include_self

    def with_scene(self, scene: Scene) -> 'OracleGrounder':
        return type(self)(scene, include_self=self.include_self)

    def _score(self, question: str, num_objects: int):
        return oracle_score(self.scene, question, num_objects, self.include_self)

    def _query(self, question: str, target: Optional[int]) -> str:
        if target is None:
            token = canonical(question)
            if token in {fact.lower() for fact in self.scene.facts}:
                return 'yes'
            if query_category(question) is None:
                return 'no'
            raise UnknownPredicateError(f"cannot answer whole-image question '{question}'")

        category = query_category(question)
        category = _QUERY_CATEGORY_ALIASES.get(category, category)
        obj = self.scene.objects[target]
        if category == 'class':
            return obj.category or 'unknown'
        if category not in ATTRIBUTE_CATEGORIES:
            raise UnknownPredicateError(f"cannot answer question '{question}' about an object")
        return attribute_value(obj, category) or 'unknown'

    def _propose(self, names: List[str]) -> Scene:
        return self.scene.subset(scene_objects_named(self.scene, names))
