"""
Corpus files: one JSON record per line.

Records are written with sorted keys, so a corpus generated twice from the
same seed is byte-identical.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Tuple

import numpy as np

from apps.core.exceptions import GenerationError, GroundingError
from apps.grounding.scene import Scene
from .questions import CATEGORIES, gen_question
from .scenes import MAX_OBJECTS, MIN_OBJECTS, gen_scene
from .serializers import CorpusRecordSerializer

logger = logging.getLogger(__name__)

# Keeps the scene seeds of different corpus seeds disjoint
SEED_STRIDE = 100_003


@dataclass(frozen=True)
class CorpusItem:
    index: int
    scene: Scene
    category: str
    task: str
    question: str
    program: str
    ground_truth: Any
    backbone_answer: Any = None


@dataclass(frozen=True)
class GenerationFailure:
    scene: str
    category: str
    error: str


def generate_corpus(seed: int, n_scenes: int, per_category: int,
                    categories: Sequence[str] = CATEGORIES,
                    min_objects: int = 3, max_objects: int = 8) -> Tuple[List[dict], List[GenerationFailure]]:
    """
    Corpus records for ``n_scenes`` generated scenes.

    Each scene gets ``per_category`` questions of every category. Templates
    a scene cannot satisfy are reported as failures instead of records.
    """
    if seed < 0:
        raise GenerationError(f'seed must be non-negative, got {seed}')
    if n_scenes < 1 or per_category < 1:
        raise GenerationError('scene and per-category counts must be at least 1')
    if not MIN_OBJECTS <= min_objects <= max_objects <= MAX_OBJECTS:
        raise GenerationError(f'object counts must satisfy {MIN_OBJECTS} <= min <= max <= {MAX_OBJECTS}')

    records, failures = [], []
    for scene_index in range(n_scenes):
        scene_seed = seed * SEED_STRIDE + scene_index
        rng = np.random.default_rng(scene_seed)
        scene = gen_scene(scene_seed, int(rng.integers(min_objects, max_objects + 1)))
        for category_index, category in enumerate(categories):
            for j in range(per_category):
                question_seed = (scene_seed * 16 + category_index) * 10_000 + j
                try:
                    generated = gen_question(category, scene, question_seed)
                except GenerationError as e:
                    logger.warning(f'Skipped {category} question {j} on {scene.image_ref}: {e}')
                    failures.append(GenerationFailure(scene.image_ref, category, str(e)))
                    continue
                records.append(generated.to_record(scene))
    logger.info(f'Generated {len(records)} questions over {n_scenes} scenes ({len(failures)} skipped)')
    return records, failures


def write_corpus(records: Iterable[dict], path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open('w', encoding='utf-8') as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + '\n')
            count += 1
    return count


def read_corpus(path) -> List[CorpusItem]:
    """
    Corpus items of a JSONL file.

    Scene paths are resolved against the corpus file's directory.
    Unreadable lines raise GenerationError naming the line.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except OSError as e:
        raise GenerationError(f'cannot read corpus {path}: {e}')

    items = []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as e:
            raise GenerationError(f'{path}:{line_number}: not valid JSON: {e}')
        serializer = CorpusRecordSerializer(data=data)
        if not serializer.is_valid():
            raise GenerationError(f'{path}:{line_number}: invalid record: {serializer.errors}')
        record = serializer.validated_data
        try:
            scene = _scene_of(record['scene'], path.parent)
        except GroundingError as e:
            raise GenerationError(f'{path}:{line_number}: {e}')
        items.append(CorpusItem(
            index=len(items),
            scene=scene,
            category=record['category'],
            task=record['task'],
            question=record['question_text'],
            program=record['program'],
            ground_truth=record['ground_truth'],
            backbone_answer=record.get('backbone_answer'),
        ))
    if not items:
        raise GenerationError(f'corpus {path} holds no records')
    logger.info(f'Read {len(items)} corpus items from {path}')
    return items


def _scene_of(value, base: Path) -> Scene:
    if isinstance(value, str):
        scene_path = Path(value)
        return Scene.load(scene_path if scene_path.is_absolute() else base / scene_path)
    return Scene.from_dict(value)
