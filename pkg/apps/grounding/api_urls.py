"""
API URL configuration for the grounding app.
"""

from django.urls import path

from . import api_views

app_name = 'grounding_api'

urlpatterns = [
    path('', api_views.GroundingView.as_view(), name='ground'),
]
