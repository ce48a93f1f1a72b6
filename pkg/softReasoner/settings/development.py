"""
Development settings: verbose engine logging, debug on.
"""

from .base import *  # noqa: F401,F403

DEBUG = True

LOGGING['loggers']['apps']['level'] = env('NEPT_LOG_LEVEL', default='INFO')  # noqa: F405
