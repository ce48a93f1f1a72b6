"""
Scene graphs: the desk-scale stand-in for an image.

A scene holds N objects with contiguous ids, pixel boxes, depths, a class
and an attribute set, plus directed relations and optional scene-level
facts answered by whole-image predicates.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from apps.core.exceptions import GroundingError
from .serializers import SceneSerializer

logger = logging.getLogger(__name__)

Box = Tuple[float, float, float, float]


@dataclass(frozen=True)
class SceneObject:
    id: int
    box: Box
    depth: Optional[float] = None
    category: str = ''
    attributes: FrozenSet[str] = frozenset()

    @property
    def center(self) -> Tuple[float, float]:
        x, y, w, h = self.box
        return x + w / 2.0, y + h / 2.0

    def has(self, concept: str) -> bool:
        concept = concept.lower()
        return concept == self.category.lower() or concept in {a.lower() for a in self.attributes}

    def to_dict(self) -> Dict:
        return {
            'id': self.id,
            'box': list(self.box),
            'depth': self.depth,
            'class': self.category,
            'attributes': sorted(self.attributes),
        }


@dataclass(frozen=True)
class Scene:
    objects: Tuple[SceneObject, ...] = ()
    relations: FrozenSet[Tuple[int, str, int]] = frozenset()
    image_ref: Optional[str] = None
    facts: FrozenSet[str] = field(default_factory=frozenset)

    def __len__(self):
        return len(self.objects)

    @property
    def num_objects(self) -> int:
        return len(self.objects)

    def related(self, subject: int, predicate: str, target: int) -> bool:
        return (subject, predicate, target) in self.relations

    def predicates(self) -> FrozenSet[str]:
        return frozenset(predicate for _, predicate, _ in self.relations)

    def subset(self, ids: Sequence[int]) -> 'Scene':
        """Scene restricted to ``ids``, renumbered 0..k-1 in the given order."""
        remap = {old: new for new, old in enumerate(ids)}
        objects = tuple(
            SceneObject(remap[old], obj.box, obj.depth, obj.category, obj.attributes)
            for old in ids
            for obj in (self.objects[old],)
        )
        relations = frozenset(
            (remap[s], p, remap[o]) for s, p, o in self.relations if s in remap and o in remap
        )
        return Scene(objects, relations, self.image_ref, self.facts)

    @classmethod
    def from_dict(cls, data: Dict) -> 'Scene':
        serializer = SceneSerializer(data=data)
        if not serializer.is_valid():
            raise GroundingError(f'invalid scene: {_flatten_errors(serializer.errors)}')
        validated = serializer.validated_data
        objects = sorted(
            (
                SceneObject(
                    id=obj['id'],
                    box=tuple(float(v) for v in obj['box']),
                    depth=obj.get('depth'),
                    category=obj.get('class', ''),
                    attributes=frozenset(obj.get('attributes', [])),
                )
                for obj in validated['objects']
            ),
            key=lambda obj: obj.id,
        )
        return cls(
            objects=tuple(objects),
            relations=frozenset(validated['relations']),
            image_ref=validated.get('image_ref') or None,
            facts=frozenset(validated.get('facts', [])),
        )

    def to_dict(self) -> Dict:
        data = {
            'objects': [obj.to_dict() for obj in self.objects],
            'relations': [list(rel) for rel in sorted(self.relations)],
            'image_ref': self.image_ref,
        }
        if self.facts:
            data['facts'] = sorted(self.facts)
        return data

    @classmethod
    def load(cls, path) -> 'Scene':
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except OSError as e:
            raise GroundingError(f'cannot read scene file {path}: {e}')
        except json.JSONDecodeError as e:
            raise GroundingError(f'scene file {path} is not valid JSON: {e}')
        scene = cls.from_dict(data)
        logger.debug(f'Loaded scene {path} with {len(scene)} objects')
        return scene

    @classmethod
    def from_boxes(cls, boxes: Iterable[Sequence[float]], image_ref: Optional[str] = None) -> 'Scene':
        """Scene of detected boxes with unknown classes and attributes."""
        objects = tuple(
            SceneObject(i, tuple(float(v) for v in box)) for i, box in enumerate(boxes)
        )
        return cls(objects, frozenset(), image_ref)


def _flatten_errors(errors) -> str:
    if isinstance(errors, dict):
        return '; '.join(f'{key}: {_flatten_errors(value)}' for key, value in errors.items())
    if isinstance(errors, list):
        return ', '.join(_flatten_errors(e) for e in errors if e)
    return str(errors)


def scene_objects_named(scene: Scene, names: Iterable[str]) -> List[int]:
    """Ids of objects whose class matches any of ``names`` (case-insensitive)."""
    wanted = {name.strip().lower() for name in names}
    return [obj.id for obj in scene.objects if obj.category.lower() in wanted]


def box_iou(first: Sequence[float], second: Sequence[float]) -> float:
    """Intersection over union of two ``[x, y, w, h]`` boxes."""
    ax, ay, aw, ah = (float(v) for v in first)
    bx, by, bw, bh = (float(v) for v in second)
    inter_w = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    inter_h = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    intersection = inter_w * inter_h
    union = aw * ah + bw * bh - intersection
    if union <= 0.0:
        return 0.0
    return intersection / union


def object_for_box(scene: Scene, box: Sequence[float]) -> Optional[int]:
    """Id of the scene object overlapping ``box`` most, lowest id on ties."""
    best, best_iou = None, 0.0
    for obj in scene.objects:
        overlap = box_iou(obj.box, box)
        if overlap > best_iou:
            best, best_iou = obj.id, overlap
    return best
