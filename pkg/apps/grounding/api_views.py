"""
Reference grounding service.

Implements the wire protocol on top of the oracle grounder for scenes
registered by ``image_ref`` in the NEPT scene directory, so the remote
client can be exercised end to end without a perception model.
"""

import logging
import re
from pathlib import Path

import numpy as np
from django.conf import settings
from drf_spectacular.utils import extend_schema
from rest_framework import status
from rest_framework.response import Response
from rest_framework.views import APIView

from apps.core.exceptions import GroundingError
from .base import DETECT, QUERY
from .geometric import GeometricGrounder
from .scene import Scene
from .serializers import GroundingRequestSerializer, GroundingResponseSerializer

logger = logging.getLogger(__name__)

# Magnitude of the (yes, no) logits emitted for crisp oracle answers
LOGIT_MAGNITUDE = 8.0

_IMAGE_REF_RE = re.compile(r'^[A-Za-z0-9_.-]+$')


def scene_path(image_ref: str) -> Path:
    return Path(settings.NEPT['SCENE_DIR']) / f'{image_ref}.json'


def load_registered_scene(image_ref: str) -> Scene:
    if not image_ref or not _IMAGE_REF_RE.match(image_ref) or image_ref.startswith('.'):
        raise FileNotFoundError(image_ref)
    path = scene_path(image_ref)
    if not path.is_file():
        raise FileNotFoundError(image_ref)
    return Scene.load(path)


def crisp_logits(scores: np.ndarray) -> list:
    yes = LOGIT_MAGNITUDE * (2.0 * scores - 1.0)
    return np.stack([yes, -yes], axis=-1).tolist()


class GroundingView(APIView):
    """
    POST a score, query or detect request about a registered scene.
    """

    @extend_schema(
        request=GroundingRequestSerializer,
        responses={200: GroundingResponseSerializer},
        description='Answer one grounding request against a registered scene',
    )
    def post(self, request):
        serializer = GroundingRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data

        try:
            scene = load_registered_scene(data['image_ref'])
        except FileNotFoundError:
            return Response(
                {'detail': f"Unknown image_ref {data['image_ref']!r}."},
                status=status.HTTP_404_NOT_FOUND,
            )

        grounder = GeometricGrounder(
            scene, include_self=settings.NEPT.get('ANALOGICAL_INCLUDE_SELF', False)
        )
        try:
            if data['kind'] == DETECT:
                proposed = grounder.propose_objects(data['names'])
                return Response({'boxes': [list(obj.box) for obj in proposed.objects]})
            if data['kind'] == QUERY:
                target = data['targets'][0] if data['targets'] else None
                if isinstance(target, tuple):
                    return Response({'detail': 'Query targets are single object ids.'},
                                    status=status.HTTP_400_BAD_REQUEST)
                return Response({'text': grounder.query(data['question'], target)})
            scores = grounder.score(data['question'], data['num_objects'])
        except GroundingError as e:
            logger.info(f'Grounding service rejected {data["kind"]} request: {e}')
            return Response({'detail': str(e)}, status=status.HTTP_400_BAD_REQUEST)

        if settings.NEPT.get('SERVICE_EMIT_LOGITS', False):
            return Response({'logits': crisp_logits(scores)})
        return Response({'scores': scores.tolist()})
