"""
Remote grounding client for the JSON wire protocol.

Requests are POSTed to the configured endpoint with a per-request timeout
and a bounded number of retries on transport failures. Yes/No logits are
normalized here, so the executor only ever sees probabilities. Responses
for scenes with an ``image_ref`` are cached in the ``grounding`` cache.
"""

import copy
import hashlib
import json
import logging
import threading
from typing import Dict, List, Optional

import numpy as np
import requests
from django.core.cache import caches

from apps.core.exceptions import GrounderTimeoutError, GroundingError, MalformedResponseError
from .base import DETECT, QUERY, SCORE, Grounder, GroundingRequest, GroundingResponse, targets_for
from .oracle import SHAPES
from .prompts import render
from .scene import Scene
from .serializers import GroundingResponseSerializer

logger = logging.getLogger(__name__)

CACHE_ALIAS = 'grounding'

# Fixed pool of cache-fill locks; keys hash onto a stripe
LOCK_STRIPES = 64


def is_bare_predicate(question: str) -> bool:
    """True for predicate tokens such as "red" or "same color", False for full questions."""
    text = question.strip()
    return not text.endswith('?') and len(text.split()) <= 3


def cache_key(endpoint: str, request: GroundingRequest) -> str:
    payload = json.dumps(
        [endpoint, request.image_ref, request.kind, request.question, request.num_objects,
         [list(t) if isinstance(t, tuple) else t for t in request.targets], list(request.names)],
        sort_keys=True,
    )
    return 'grounding:' + hashlib.sha1(payload.encode('utf-8')).hexdigest()


class RemoteGrounder(Grounder):
    """
    Wire-protocol client bound to one scene.

    Concurrent use is safe: at most ``max_in_flight`` requests are on the
    wire at once, and identical cacheable requests wait on a striped lock
    so only the first one reaches the network.
    """

    name = 'remote'

    def __init__(self, scene: Scene, endpoint: str, timeout: float = 30.0, retries: int = 2,
                 max_in_flight: int = 4, session: Optional[requests.Session] = None):
        super().__init__(scene)
        if not endpoint:
            raise GroundingError('remote grounder needs an endpoint')
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = max(0, retries)
        self.session = session or requests.Session()
        self.cache = caches[CACHE_ALIAS]
        self._in_flight = threading.BoundedSemaphore(max(1, max_in_flight))
        self._locks = tuple(threading.Lock() for _ in range(LOCK_STRIPES))
        self._counter_lock = threading.Lock()
        self.network_calls = 0

    def with_scene(self, scene: Scene) -> 'RemoteGrounder':
        clone = copy.copy(self)
        clone.scene = scene
        return clone

    # Grounder interface

    def _score(self, question: str, num_objects: int):
        if is_bare_predicate(question):
            token = question.strip()
            question = render(token, num_objects, is_class=token.lower() in SHAPES)
        n = self.num_objects
        request = GroundingRequest(SCORE, question, num_objects, targets_for(num_objects, n),
                                   image_ref=self.scene.image_ref)
        response = self.send(request)
        if response.text is not None or response.boxes is not None:
            raise MalformedResponseError('score request answered without scores or logits')
        return self._shape_scores(response, num_objects, n)

    def _query(self, question: str, target: Optional[int]) -> str:
        targets = () if target is None else (target,)
        request = GroundingRequest(QUERY, question, 1 if targets else 0, targets,
                                   image_ref=self.scene.image_ref)
        response = self.send(request)
        if response.text is None:
            raise MalformedResponseError('query request answered without text')
        return response.text

    def ask_pair(self, question: str, first: int, second: int) -> str:
        """Free-text answer about two objects, ``first`` in the red box and ``second`` in the green box."""
        for target in (first, second):
            if not 0 <= target < self.num_objects:
                raise GroundingError(f'pair target {target} is not an object id (N={self.num_objects})')
        request = GroundingRequest(QUERY, question, 2, ((first, second),), image_ref=self.scene.image_ref)
        response = self.send(request)
        if response.text is None:
            raise MalformedResponseError('pair query answered without text')
        return response.text

    def _propose(self, names: List[str]) -> Scene:
        request = GroundingRequest(DETECT, names=tuple(names), image_ref=self.scene.image_ref)
        response = self.send(request)
        if response.boxes is None:
            raise MalformedResponseError('detect request answered without boxes')
        for box in response.boxes:
            if box[2] <= 0 or box[3] <= 0:
                raise MalformedResponseError(f'detected box {box} has no area')
        return Scene.from_boxes(response.boxes, image_ref=self.scene.image_ref)

    # Transport

    def send(self, request: GroundingRequest) -> GroundingResponse:
        if not request.image_ref:
            return self._parse(self._post(request))
        key = cache_key(self.endpoint, request)
        with self._key_lock(key):
            body = self.cache.get(key)
            if body is None:
                body = self._post(request)
                self.cache.set(key, body)
            else:
                logger.debug(f'Grounding cache hit for {request.kind} {request.question!r}')
        return self._parse(body)

    def _key_lock(self, key: str) -> threading.Lock:
        return self._locks[int(key[-8:], 16) % LOCK_STRIPES]

    def _post(self, request: GroundingRequest) -> Dict:
        body = request.to_wire()
        attempts = self.retries + 1
        last_error = None
        for attempt in range(1, attempts + 1):
            try:
                with self._in_flight:
                    with self._counter_lock:
                        self.network_calls += 1
                    response = self.session.post(self.endpoint, json=body, timeout=self.timeout)
                if response.status_code >= 500:
                    last_error = GroundingError(f'grounding service error {response.status_code}')
                    logger.warning(f'Grounding attempt {attempt}/{attempts} got HTTP {response.status_code}')
                    continue
                if response.status_code >= 400:
                    raise GroundingError(
                        f'grounding service rejected the request ({response.status_code}): {response.text[:200]}'
                    )
                try:
                    return response.json()
                except ValueError:
                    raise MalformedResponseError('grounding response is not JSON')
            except requests.Timeout:
                last_error = GrounderTimeoutError(
                    f'grounding request timed out after {self.timeout}s ({attempts} attempts)'
                )
                logger.warning(f'Grounding attempt {attempt}/{attempts} timed out')
            except requests.RequestException as e:
                last_error = GroundingError(f'grounding transport failure: {e}')
                logger.warning(f'Grounding attempt {attempt}/{attempts} failed: {e}')
        logger.info(f'Grounding request to {self.endpoint} failed after {attempts} attempts')
        raise last_error

    def _parse(self, body) -> GroundingResponse:
        if not isinstance(body, dict):
            raise MalformedResponseError('grounding response must be a JSON object')
        serializer = GroundingResponseSerializer(data=body)
        if not serializer.is_valid():
            raise MalformedResponseError(f'malformed grounding response: {serializer.errors}')
        data = serializer.validated_data
        try:
            if 'scores' in data:
                return GroundingResponse(scores=np.array(data['scores'], dtype=np.float64))
            if 'logits' in data:
                logits = np.array(data['logits'], dtype=np.float64)
                if logits.ndim == 0 or logits.shape[-1] != 2:
                    raise MalformedResponseError('logits must be (yes, no) pairs')
                return GroundingResponse(logits=logits)
        except (TypeError, ValueError) as e:
            raise MalformedResponseError(f'grounding tensor is not rectangular numeric data: {e}')
        if 'text' in data:
            return GroundingResponse(text=data['text'])
        return GroundingResponse(boxes=[tuple(box) for box in data['boxes']])

    @staticmethod
    def _shape_scores(response: GroundingResponse, num_objects: int, n: int) -> np.ndarray:
        probs = response.probabilities()
        if num_objects == 0 and probs.shape == (1,):
            probs = probs.reshape(())
        if num_objects == 2 and probs.shape == (n, n):
            probs = probs.copy()
            np.fill_diagonal(probs, 0.0)
        return probs
