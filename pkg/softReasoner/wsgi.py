"""
WSGI config for the softReasoner project.

It exposes the WSGI callable as a module-level variable named ``application``.
The reference grounding service runs behind gunicorn through this module.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'softReasoner.settings.production')

application = get_wsgi_application()
