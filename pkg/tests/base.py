"""
Base test utilities and fixtures for the softReasoner project.

Scenes are built by hand or loaded from ``sample_data/scenes``; programs
run against the oracle grounder unless a test says otherwise.
"""

import math
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from apps.core.exceptions import UnknownPredicateError
from apps.executor.interpreter import run
from apps.executor.options import ExecOptions
from apps.grounding.base import Grounder
from apps.grounding.oracle import OracleGrounder
from apps.grounding.scene import Scene, SceneObject, scene_objects_named
from apps.programs.parser import parse_source

SAMPLE_DATA = Path(settings.BASE_DIR) / 'sample_data'
SCENES_DIR = SAMPLE_DATA / 'scenes'
PROGRAMS_DIR = SAMPLE_DATA / 'programs'
FIXTURES_DIR = Path(__file__).resolve().parent / 'fixtures'

# Tolerance of the closed-form operator values
VALUE_TOLERANCE = 1e-5


def load_scene(name: str) -> Scene:
    return Scene.load(SCENES_DIR / f'{name}.json')


def make_scene(*objects, relations=(), facts=(), image_ref=None) -> Scene:
    """
    Scene from ``(category, attributes)`` pairs laid out left to right.

    Boxes are 40x40 at x = 100 * id, depth equals the id.
    """
    scene_objects = tuple(
        SceneObject(i, (100.0 * i, 50.0, 40.0, 40.0), float(i), category, frozenset(attributes))
        for i, (category, attributes) in enumerate(objects)
    )
    return Scene(scene_objects, frozenset(relations), image_ref, frozenset(facts))


def run_source(source: str, scene: Scene, grounder=None, **options):
    """Parse and run ``source`` against ``scene`` (oracle grounder by default)."""
    grounder = grounder or OracleGrounder(scene)
    return run(parse_source(source), grounder, ExecOptions(**options))


def tie_margin(values) -> float:
    """Smallest gap between distinct entries; 0 when two entries tie."""
    flat = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    if flat.size < 2:
        return math.inf
    return float(np.min(np.diff(flat)))


class BaseTestCase(SimpleTestCase):
    """Base test case with the bundled scenes loaded once per class."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.demo = load_scene('demo')
        cls.street = load_scene('street')
        cls.empty = load_scene('empty')

    def run_demo(self, source: str, **options):
        return run_source(source, self.demo, **options)

    def assertClose(self, actual, expected, tolerance=VALUE_TOLERANCE):
        """Assert scalars or sequences agree entry-wise within ``tolerance``."""
        actual = np.asarray(actual, dtype=np.float64)
        expected = np.asarray(expected, dtype=np.float64)
        self.assertEqual(actual.shape, expected.shape, f'shape {actual.shape} != {expected.shape}')
        diff = float(np.max(np.abs(actual - expected))) if actual.size else 0.0
        self.assertLessEqual(diff, tolerance, f'{actual.tolist()} != {expected.tolist()} (max diff {diff})')

    def assertRaisesAt(self, error_class, line, column, func, *args, **kwargs):
        """Assert ``func`` raises ``error_class`` located at ``line:column``."""
        with self.assertRaises(error_class) as caught:
            func(*args, **kwargs)
        self.assertEqual((caught.exception.line, caught.exception.column), (line, column),
                         f'wrong position for: {caught.exception}')
        return caught.exception


class ScriptedGrounder(Grounder):
    """Grounder answering from fixed score tensors and texts keyed by question."""

    name = 'scripted'

    def __init__(self, scene: Scene, scores=None, answers=None):
        super().__init__(scene)
        self.scores = dict(scores or {})
        self.answers = dict(answers or {})
        self.calls = []

    def with_scene(self, scene: Scene) -> 'ScriptedGrounder':
        return type(self)(scene, self.scores, self.answers)

    def _score(self, question: str, num_objects: int):
        self.calls.append((question, num_objects))
        try:
            return np.asarray(self.scores[question], dtype=np.float64)
        except KeyError:
            raise UnknownPredicateError(f"unknown predicate '{question}'")

    def _query(self, question: str, target):
        self.calls.append((question, target))
        return self.answers.get(question, 'unknown')

    def _propose(self, names):
        return self.scene.subset(scene_objects_named(self.scene, names))
