"""
Production settings for serving the reference grounding service.
"""

from .base import *  # noqa: F401,F403

DEBUG = False

SECURE_CONTENT_TYPE_NOSNIFF = True
