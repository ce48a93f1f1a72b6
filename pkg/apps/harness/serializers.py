from rest_framework import serializers

from apps.executor.options import REG, TASKS, VQA
from .questions import ALL_CATEGORIES, REF


class CorpusRecordSerializer(serializers.Serializer):
    """
    One corpus line: a scene (inline document or path), the question and
    its program, and the brute-force ground truth.
    """

    scene = serializers.JSONField()
    category = serializers.ChoiceField(choices=ALL_CATEGORIES)
    task = serializers.ChoiceField(choices=TASKS, required=False)
    question_text = serializers.CharField(allow_blank=True, default='', trim_whitespace=False)
    program = serializers.CharField(allow_blank=True, trim_whitespace=False)
    ground_truth = serializers.JSONField()
    backbone_answer = serializers.JSONField(required=False, allow_null=True, default=None)

    def validate_scene(self, value):
        if not isinstance(value, (dict, str)) or not value:
            raise serializers.ValidationError('Scene must be an inline scene document or a file path.')
        return value

    def validate(self, attrs):
        if 'task' not in attrs:
            attrs['task'] = REG if attrs['category'] == REF else VQA
        truth = attrs['ground_truth']
        if attrs['task'] == REG:
            box = truth.get('box') if isinstance(truth, dict) else None
            if not isinstance(box, list) or len(box) != 4:
                raise serializers.ValidationError({'ground_truth': 'Ref ground truth needs a 4-number box.'})
        return attrs
