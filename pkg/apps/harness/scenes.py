"""
Synthetic CLEVR-style scenes.

Objects are placed one per cell of a 5x2 grid on a 480x320 canvas with a
random offset inside the cell, so boxes never overlap. Spatial relations
are derived from the placed boxes and depths and stored with the scene.
"""

import logging

import numpy as np

from apps.core.exceptions import GenerationError
from apps.grounding.geometric import geometric_score
from apps.grounding.oracle import COLORS, MATERIALS, SHAPES, SIZES, SPATIAL
from apps.grounding.scene import Scene, SceneObject

logger = logging.getLogger(__name__)

CANVAS_WIDTH = 480
CANVAS_HEIGHT = 320
GRID_COLUMNS = 5
GRID_ROWS = 2
MIN_OBJECTS = 2
MAX_OBJECTS = GRID_COLUMNS * GRID_ROWS

BOX_SIDE = {'small': 36.0, 'large': 72.0}
MAX_DEPTH = 10.0


def gen_scene(seed: int, n_objects: int) -> Scene:
    if not MIN_OBJECTS <= n_objects <= MAX_OBJECTS:
        raise GenerationError(f'scenes hold {MIN_OBJECTS} to {MAX_OBJECTS} objects, got {n_objects}')
    rng = np.random.default_rng(seed)
    cell_w = CANVAS_WIDTH / GRID_COLUMNS
    cell_h = CANVAS_HEIGHT / GRID_ROWS
    cells = rng.permutation(MAX_OBJECTS)[:n_objects]

    objects = []
    for object_id, cell in enumerate(cells):
        column, row = int(cell) % GRID_COLUMNS, int(cell) // GRID_COLUMNS
        size = SIZES[rng.integers(len(SIZES))]
        side = BOX_SIDE[size]
        x = column * cell_w + rng.uniform(0.0, cell_w - side)
        y = row * cell_h + rng.uniform(0.0, cell_h - side)
        objects.append(SceneObject(
            id=object_id,
            box=(_floor_tenth(x), _floor_tenth(y), side, side),
            depth=round(float(rng.uniform(0.0, MAX_DEPTH)), 3),
            category=SHAPES[rng.integers(len(SHAPES))],
            attributes=frozenset({
                COLORS[rng.integers(len(COLORS))],
                size,
                MATERIALS[rng.integers(len(MATERIALS))],
            }),
        ))

    scene = Scene(tuple(objects), image_ref=f'clevr-{seed}-{n_objects}')
    relations = set()
    for predicate in SPATIAL:
        holds = geometric_score(scene, predicate)
        relations.update((int(x), predicate, int(y)) for x, y in zip(*np.nonzero(holds)))
    logger.debug(f'Generated scene {scene.image_ref} with {n_objects} objects and {len(relations)} relations')
    return Scene(scene.objects, frozenset(relations), scene.image_ref)


def _floor_tenth(value: float) -> float:
    return float(np.floor(value * 10.0) / 10.0)
