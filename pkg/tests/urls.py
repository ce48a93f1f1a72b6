"""
URL configuration for the remote grounding tests: the real API plus
scripted endpoints under ``scripted/``.
"""

from django.urls import include, path

from . import views

urlpatterns = [
    path('api/', include('api_urls', namespace='api')),
    path('scripted/stall/', views.stall, name='stall'),
    path('scripted/malformed/', views.malformed, name='malformed'),
    path('scripted/text-for-scores/', views.text_for_scores, name='text-for-scores'),
    path('scripted/flaky/', views.flaky, name='flaky'),
    path('scripted/counting/', views.counting, name='counting'),
    path('scripted/slow/', views.slow, name='slow'),
    path('scripted/arbiter/', views.arbiter, name='arbiter'),
]
