"""softReasoner URL Configuration

Only the API surface is routed: the reference grounding service and its schema.
"""
from django.urls import path, include

urlpatterns = [
    path('api/', include('api_urls', namespace='api')),
]
