"""
Serializers for scene documents and the grounding wire protocol.
"""

import math

from rest_framework import serializers


class SceneObjectSerializer(serializers.Serializer):
    """One detected object: id, [x, y, w, h] box, depth, class and attributes."""

    id = serializers.IntegerField(min_value=0)
    box = serializers.ListField(child=serializers.FloatField(), min_length=4, max_length=4)
    depth = serializers.FloatField(required=False, allow_null=True, default=None)
    attributes = serializers.ListField(child=serializers.CharField(max_length=64), default=list)

    def get_fields(self):
        fields = super().get_fields()
        # 'class' is a Python keyword, so it cannot be declared as an attribute
        fields['class'] = serializers.CharField(max_length=64, required=False, allow_blank=True, default='')
        return fields

    def validate_box(self, value):
        if not all(math.isfinite(v) for v in value):
            raise serializers.ValidationError('Box coordinates must be finite.')
        if value[2] <= 0 or value[3] <= 0:
            raise serializers.ValidationError('Box width and height must be positive.')
        return value

    def validate_depth(self, value):
        if value is not None and not math.isfinite(value):
            raise serializers.ValidationError('Depth must be finite.')
        return value


class SceneSerializer(serializers.Serializer):
    """Scene graph document as stored in scene files and corpus records."""

    objects = SceneObjectSerializer(many=True)
    relations = serializers.ListField(child=serializers.ListField(min_length=3, max_length=3), default=list)
    facts = serializers.ListField(child=serializers.CharField(max_length=128), default=list)
    image_ref = serializers.CharField(required=False, allow_null=True, allow_blank=True, default=None)

    def validate(self, attrs):
        ids = sorted(obj['id'] for obj in attrs['objects'])
        if ids != list(range(len(ids))):
            raise serializers.ValidationError({'objects': 'Object ids must be 0..N-1 without gaps.'})
        relations = []
        for relation in attrs['relations']:
            subject, predicate, target = relation
            if not isinstance(predicate, str) or not predicate:
                raise serializers.ValidationError({'relations': f'Invalid predicate in {relation}.'})
            for endpoint in (subject, target):
                if isinstance(endpoint, bool) or not isinstance(endpoint, int) or not 0 <= endpoint < len(ids):
                    raise serializers.ValidationError({'relations': f'Invalid endpoint in {relation}.'})
            relations.append((subject, predicate, target))
        attrs['relations'] = relations
        return attrs


class GroundingRequestSerializer(serializers.Serializer):
    """Request body of the grounding protocol."""

    KIND_CHOICES = [('score', 'score'), ('query', 'query'), ('detect', 'detect')]

    kind = serializers.ChoiceField(choices=KIND_CHOICES)
    image_ref = serializers.CharField(required=False, allow_null=True, allow_blank=True, default=None)
    question = serializers.CharField(required=False, allow_blank=True, default='')
    num_objects = serializers.IntegerField(required=False, min_value=0, max_value=2, default=0)
    targets = serializers.ListField(required=False, default=list)
    names = serializers.ListField(child=serializers.CharField(max_length=64), required=False, default=list)

    def validate(self, attrs):
        kind = attrs['kind']
        if kind in ('score', 'query') and not attrs['question']:
            raise serializers.ValidationError({'question': f'A {kind} request needs a question.'})
        if kind == 'detect' and not attrs['names']:
            raise serializers.ValidationError({'names': 'A detect request needs at least one name.'})
        targets = []
        for target in attrs['targets']:
            if isinstance(target, list):
                if len(target) != 2 or not all(_is_index(t) for t in target):
                    raise serializers.ValidationError({'targets': f'Invalid target pair {target}.'})
                targets.append(tuple(target))
            elif _is_index(target):
                targets.append(target)
            else:
                raise serializers.ValidationError({'targets': f'Invalid target {target!r}.'})
        attrs['targets'] = targets
        return attrs


class GroundingResponseSerializer(serializers.Serializer):
    """
    Response body of the grounding protocol.

    Exactly one of scores, logits, text or boxes is present; nested
    shapes are checked against the request by the client.
    """

    scores = serializers.JSONField(required=False)
    logits = serializers.JSONField(required=False)
    text = serializers.CharField(required=False, allow_blank=True)
    boxes = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=4, max_length=4),
        required=False,
    )

    def validate(self, attrs):
        present = [key for key in ('scores', 'logits', 'text', 'boxes') if key in attrs]
        if len(present) != 1:
            raise serializers.ValidationError(
                f'Expected exactly one of scores, logits, text or boxes, got {present or "none"}.'
            )
        return attrs


def _is_index(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0
