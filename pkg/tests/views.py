"""
Scripted grounding endpoints used by the remote-client tests.

Each view misbehaves in one specific way (stalling, answering with the
wrong shape, failing once) or records how it was called, and otherwise
delegates to the reference grounding service.
"""

import json
import threading
import time

from rest_framework import status
from rest_framework.decorators import api_view
from rest_framework.response import Response

from apps.grounding.api_views import GroundingView

STALL_SECONDS = 1.0
SLOW_SECONDS = 0.2

_ground = GroundingView.as_view()


class RequestLog:
    """Thread-safe request counter with a high-water mark of concurrent requests."""

    def __init__(self):
        self.lock = threading.Lock()
        self.reset()

    def reset(self):
        with self.lock:
            self.count = 0
            self.active = 0
            self.peak = 0
            self.bodies = []

    def hit(self, body=None) -> int:
        with self.lock:
            self.count += 1
            if body is not None:
                self.bodies.append(body)
            return self.count

    def enter(self):
        with self.lock:
            self.active += 1
            self.peak = max(self.peak, self.active)

    def leave(self):
        with self.lock:
            self.active -= 1


request_log = RequestLog()


@api_view(['POST'])
def stall(request):
    request_log.hit()
    time.sleep(STALL_SECONDS)
    return Response({'scores': []})


@api_view(['POST'])
def malformed(request):
    # a 2 x 3 matrix whatever the request
    return Response({'scores': [[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]]})


@api_view(['POST'])
def text_for_scores(request):
    return Response({'text': 'yes'})


@api_view(['POST'])
def flaky(request):
    if request_log.hit() == 1:
        return Response({'detail': 'Warming up.'}, status=status.HTTP_503_SERVICE_UNAVAILABLE)
    return _ground(request._request)


@api_view(['POST'])
def counting(request):
    # read the raw body so the delegated view can parse it again
    request_log.hit(json.loads(request._request.body))
    return _ground(request._request)


@api_view(['POST'])
def slow(request):
    request_log.hit()
    request_log.enter()
    try:
        time.sleep(SLOW_SECONDS)
    finally:
        request_log.leave()
    return _ground(request._request)


@api_view(['POST'])
def arbiter(request):
    request_log.hit(request.data)
    return Response({'text': '1'})
