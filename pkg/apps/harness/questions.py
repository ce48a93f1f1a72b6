"""
Question templates over generated scenes.

Each template samples predicates from the scene (and absent ones for
negative cases), builds a logical form, and derives both the reasoning
program and the ground truth from it. Referents are always described
uniquely and restrictions are never empty.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from apps.core.exceptions import GenerationError
from apps.executor.options import REG, VQA
from apps.grounding.oracle import ATTRIBUTE_CATEGORIES, COLORS, SHAPES, SPATIAL, attribute_value
from apps.grounding.prompts import RELATION_PHRASES
from apps.grounding.scene import Scene
from apps.programs.printer import pretty_print
from . import logical_forms as lf

logger = logging.getLogger(__name__)

EXIST = 'Exist'
COUNT = 'Count'
COMPARE_NUMBER = 'CompareNumber'
QUERY_ATTRIBUTE = 'QueryAttribute'
COMPARE_ATTRIBUTE = 'CompareAttribute'
REF = 'Ref'
JOINT_CONSTRAINT = 'JointConstraint'

CATEGORIES = (EXIST, COUNT, COMPARE_NUMBER, QUERY_ATTRIBUTE, COMPARE_ATTRIBUTE, REF)
ALL_CATEGORIES = CATEGORIES + (JOINT_CONSTRAINT,)

MAX_TRIES = 100

# Order in which attribute words are spoken before the noun
_SPOKEN_ORDER = ('size', 'color', 'material')


@dataclass(frozen=True)
class QuestionSpec:
    category: str
    question: str
    logical_form: Any
    program: str
    ground_truth: Any
    task: str = VQA
    backbone_answer: Any = None

    def to_record(self, scene: Scene) -> Dict[str, Any]:
        record = {
            'scene': scene.to_dict(),
            'category': self.category,
            'task': self.task,
            'question_text': self.question,
            'program': self.program,
            'ground_truth': self.ground_truth,
        }
        if self.backbone_answer is not None:
            record['backbone_answer'] = self.backbone_answer
        return record


class QuestionGenerator:
    """Samples one question of a category; not shared between threads."""

    def __init__(self, scene: Scene, seed: int):
        self.scene = scene
        self.rng = np.random.default_rng(seed)

    # Sampling helpers

    def pick(self, items: Sequence):
        return items[int(self.rng.integers(len(items)))]

    def chance(self, p: float = 0.5) -> bool:
        return bool(self.rng.random() < p)

    def some_object(self):
        return self.pick(self.scene.objects)

    def description(self, obj) -> List[str]:
        """A random non-empty subset of an object's shape and attribute words."""
        words = [obj.category] + [attribute_value(obj, c) for c in _SPOKEN_ORDER]
        words = [w for w in words if w]
        k = int(self.rng.integers(1, len(words) + 1))
        order = self.rng.permutation(len(words))[:k]
        return [words[i] for i in sorted(order)]

    def absent_description(self) -> List[str]:
        return [self.pick(COLORS), self.pick(SHAPES)]

    def related(self, obj) -> Optional[tuple]:
        """(relation, target words) for some object ``obj`` stands in a spatial relation to."""
        options = [
            (predicate, self.scene.objects[target])
            for subject, predicate, target in sorted(self.scene.relations)
            if subject == obj.id
        ]
        if not options:
            return None
        relation, target = self.pick(options)
        return relation, self.description(target)

    def unique_description(self, obj):
        """Object-set form matching ``obj`` alone, with its phrase."""
        for _ in range(MAX_TRIES):
            words = self.description(obj)
            form = lf.conjunction(words)
            phrase = noun_phrase(words)
            if self.chance(0.4):
                link = self.related(obj)
                if link is not None:
                    relation, target_words = link
                    form = lf.And(form, lf.Relate(relation, lf.conjunction(target_words)))
                    phrase = f'{phrase} that is {RELATION_PHRASES[relation]} the {noun_phrase(target_words)}'
            if lf.objects_of(form, self.scene) == frozenset({obj.id}):
                return form, phrase
        raise GenerationError(f'no unique description for object {obj.id} after {MAX_TRIES} tries')

    def restriction(self):
        """Non-empty object-set form with its phrase."""
        obj = self.some_object()
        words = self.description(obj)
        form, phrase = lf.conjunction(words), noun_phrase(words, many=True)
        if self.chance(0.3):
            link = self.related(obj)
            if link is not None:
                relation, target_words = link
                form = lf.And(form, lf.Relate(relation, lf.conjunction(target_words)))
                phrase = f'{phrase} {RELATION_PHRASES[relation]} the {noun_phrase(target_words)}'
        return form, phrase

    # Templates

    def exist(self):
        if self.chance(0.25):
            return self.forall()
        if self.chance(0.5):
            words = self.description(self.some_object())
        else:
            words = self.absent_description()
        form = lf.conjunction(words)
        phrase = noun_phrase(words)
        if self.chance(0.4):
            link = self.related(self.some_object())
            if link is not None:
                relation, target_words = link
                form = lf.And(form, lf.Relate(relation, lf.conjunction(target_words)))
                phrase = f'{phrase} {RELATION_PHRASES[relation]} the {noun_phrase(target_words)}'
        return lf.Exists(form), f'Is there {article(phrase)} {phrase}?'

    def forall(self):
        restriction, phrase = self.restriction()
        category = self.pick(tuple(ATTRIBUTE_CATEGORIES))
        value = attribute_value(self.some_object(), category)
        if value is None:
            raise GenerationError(f'sampled object has no {category}')
        return lf.Forall(restriction, lf.Pred(value)), f'Are all the {phrase} {value}?'

    def count(self):
        form, phrase = self.restriction()
        return lf.Count(form), f'How many {phrase} are there?'

    def compare_number(self):
        left, left_phrase = self.restriction()
        right, right_phrase = self.restriction()
        comparison = self.pick((lf.GREATER, lf.FEWER, lf.EQUAL))
        wording = {
            lf.GREATER: f'Are there more {left_phrase} than {right_phrase}?',
            lf.FEWER: f'Are there fewer {left_phrase} than {right_phrase}?',
            lf.EQUAL: f'Are there the same number of {left_phrase} and {right_phrase}?',
        }[comparison]
        return lf.CompareCount(comparison, left, right), wording

    def query_attribute(self):
        obj = self.some_object()
        referent, phrase = self.unique_description(obj)
        asked = [c for c in ('color', 'shape', 'size', 'material') if attribute_value(obj, c) not in phrase.split()]
        if not asked:
            raise GenerationError('the description already names every attribute')
        category = self.pick(asked)
        return lf.QueryAttr(category, referent), f'What is the {category} of the {phrase}?'

    def compare_attribute(self):
        if len(self.scene) < 2:
            raise GenerationError('comparing attributes needs two objects')
        first, second = (self.scene.objects[i] for i in self.rng.permutation(len(self.scene))[:2])
        left, left_phrase = self.unique_description(first)
        right, right_phrase = self.unique_description(second)
        category = self.pick(tuple(ATTRIBUTE_CATEGORIES))
        question = f'Does the {left_phrase} have the same {category} as the {right_phrase}?'
        return lf.SameAttr(category, left, right), question

    def ref(self):
        referent, phrase = self.unique_description(self.some_object())
        return lf.Select(referent), f'the {phrase}'

    def joint_constraint(self):
        """Chain of three object slots linked by two relations."""
        if len(self.scene) < 3:
            raise GenerationError('joint constraints need three objects')
        if self.chance(0.5):
            chain = self.related_chain()
        else:
            ids = self.rng.permutation(len(self.scene))[:3]
            chain = [self.scene.objects[int(i)] for i in ids], [self.pick(SPATIAL), self.pick(SPATIAL)]
        (a, b, c), (first, second) = chain
        words = [self.description(obj) for obj in (a, b, c)]
        inner = lf.And(lf.conjunction(words[1]), lf.Relate(second, lf.conjunction(words[2])))
        form = lf.Exists(lf.And(lf.conjunction(words[0]), lf.Relate(first, inner)))
        question = (
            f'Is there {article(noun_phrase(words[0]))} {noun_phrase(words[0])} {RELATION_PHRASES[first]} '
            f'{article(noun_phrase(words[1]))} {noun_phrase(words[1])} that is {RELATION_PHRASES[second]} '
            f'{article(noun_phrase(words[2]))} {noun_phrase(words[2])}?'
        )
        return form, question

    def related_chain(self):
        for _ in range(MAX_TRIES):
            a = self.some_object()
            first = self.related_object(a)
            if first is None:
                continue
            relation_ab, b = first
            second = self.related_object(b)
            if second is None:
                continue
            relation_bc, c = second
            return (a, b, c), (relation_ab, relation_bc)
        raise GenerationError(f'no related chain of three objects after {MAX_TRIES} tries')

    def related_object(self, obj):
        options = [(p, t) for s, p, t in sorted(self.scene.relations) if s == obj.id]
        if not options:
            return None
        relation, target = self.pick(options)
        return relation, self.scene.objects[target]

    TEMPLATES = {
        EXIST: exist,
        COUNT: count,
        COMPARE_NUMBER: compare_number,
        QUERY_ATTRIBUTE: query_attribute,
        COMPARE_ATTRIBUTE: compare_attribute,
        REF: ref,
        JOINT_CONSTRAINT: joint_constraint,
    }


def gen_question(category: str, scene: Scene, seed: int) -> QuestionSpec:
    """
    Sample a question of ``category`` about ``scene``.

    Templates are retried until the sample is well formed; after
    ``MAX_TRIES`` rejections a GenerationError is raised.
    """
    if category not in QuestionGenerator.TEMPLATES:
        raise GenerationError(f"unknown question category '{category}'")
    generator = QuestionGenerator(scene, seed)
    template = QuestionGenerator.TEMPLATES[category]
    last_error = None
    for _ in range(MAX_TRIES):
        try:
            form, question = template(generator)
            truth = lf.ground_truth(form, scene)
        except GenerationError as e:
            last_error = e
            continue
        program = pretty_print(lf.to_program(form))
        task = REG if category == REF else VQA
        return QuestionSpec(category, question, form, program, truth, task)
    raise GenerationError(f'cannot generate a {category} question for {scene.image_ref}: {last_error}')


# Wording

PLURALS = {'sphere': 'spheres', 'cube': 'cubes', 'cylinder': 'cylinders', 'object': 'objects'}


def noun_phrase(words: Sequence[str], many: bool = False) -> str:
    shapes = [w for w in words if w in SHAPES]
    adjectives = [w for w in words if w not in SHAPES]
    noun = shapes[0] if shapes else 'object'
    return ' '.join(adjectives + [PLURALS[noun] if many else noun])


def article(phrase: str) -> str:
    return 'an' if phrase[:1] in 'aeiou' else 'a'
