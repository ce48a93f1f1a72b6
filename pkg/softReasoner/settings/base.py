"""
Base Django settings for the softReasoner project.

This file contains common settings that apply to all environments,
including the NEPT block that configures the reasoning engine.
"""

from pathlib import Path
import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Initialize environment variables
env = environ.Env(
    DEBUG=(bool, False),
    ALLOWED_HOSTS=(list, ['localhost', '127.0.0.1']),
)

# Optional .env file next to manage.py
environ.Env.read_env(str(BASE_DIR / '.env'))

SECRET_KEY = env('SECRET_KEY', default='soft-reasoner-insecure-development-key-change-me')
DEBUG = env('DEBUG')
ALLOWED_HOSTS = env('ALLOWED_HOSTS')

# Application definition
DJANGO_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'django.contrib.staticfiles',
]

THIRD_PARTY_APPS = [
    'rest_framework',
    'drf_spectacular',
]

LOCAL_APPS = [
    'apps.core',
    'apps.tensor',
    'apps.programs',
    'apps.executor',
    'apps.grounding',
    'apps.verification',
    'apps.harness',
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'softReasoner.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
            ],
        },
    },
]

WSGI_APPLICATION = 'softReasoner.wsgi.application'

# Nothing is persisted; the database only backs Django's test runner.
DATABASES = {
    'default': env.db('DATABASE_URL', default=f'sqlite:///{BASE_DIR / "db.sqlite3"}'),
}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

STATIC_URL = '/static/'

# Django REST Framework configuration
# The grounding protocol is unauthenticated JSON in, JSON out.
REST_FRAMEWORK = {
    'DEFAULT_SCHEMA_CLASS': 'drf_spectacular.openapi.AutoSchema',
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'UNAUTHENTICATED_USER': None,
}

# API Documentation with drf-spectacular
SPECTACULAR_SETTINGS = {
    'TITLE': 'softReasoner Grounding API',
    'DESCRIPTION': 'Reference grounding service: score, query and detect over registered scenes',
    'VERSION': '1.0.0',
    'SERVE_INCLUDE_SCHEMA': False,
    'COMPONENT_SPLIT_REQUEST': True,
}

# Caching Configuration
CACHES = {
    'default': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'soft-reasoner-cache',
        'TIMEOUT': 300,
    },
    # Remote grounding responses, keyed by (image_ref, kind, question, arity, targets)
    'grounding': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'grounding-cache',
        'TIMEOUT': None,
        'OPTIONS': {
            'MAX_ENTRIES': 50000,
        }
    },
}

# Reasoning engine configuration
NEPT = {
    'GROUNDER': env('NEPT_GROUNDER', default='oracle'),
    'ENDPOINT': env('NEPT_ENDPOINT', default=''),
    'TASK': env('NEPT_TASK', default='vqa'),
    'TAU': env.float('NEPT_TAU', default=0.25),
    'GAMMA': env.float('NEPT_GAMMA', default=0.25),
    'RELATE_LITERAL': env.bool('NEPT_RELATE_LITERAL', default=False),
    'GRADIENTS': env.bool('NEPT_GRADIENTS', default=False),
    'STEP_BUDGET': env.int('NEPT_STEP_BUDGET', default=100_000),
    'CALL_BUDGET': env.int('NEPT_CALL_BUDGET', default=1_000),
    'REMOTE_TIMEOUT': env.float('NEPT_REMOTE_TIMEOUT', default=30.0),
    'REMOTE_RETRIES': env.int('NEPT_REMOTE_RETRIES', default=2),
    'REMOTE_MAX_IN_FLIGHT': env.int('NEPT_REMOTE_MAX_IN_FLIGHT', default=4),
    'GATE_PRESET': env('NEPT_GATE_PRESET', default=''),
    'GATE_TAU': env.float('NEPT_GATE_TAU', default=0.5),
    'GATE_TEMP': env.float('NEPT_GATE_TEMP', default=1.0),
    'SEED': env.int('NEPT_SEED', default=0),
    'JOBS': env.int('NEPT_JOBS', default=0),
    'ANALOGICAL_INCLUDE_SELF': env.bool('NEPT_ANALOGICAL_INCLUDE_SELF', default=False),
    'SCENE_DIR': env('NEPT_SCENE_DIR', default=str(BASE_DIR / 'sample_data' / 'scenes')),
    'SERVICE_EMIT_LOGITS': env.bool('NEPT_SERVICE_EMIT_LOGITS', default=False),
    'NOISE': env.float('NEPT_NOISE', default=0.0),
}

# Confidence gating presets (threshold, temperature) per backbone
NEPT_GATE_PRESETS = {
    'qwen2vl': {'tau': 0.70, 'temp': 0.40},
    'ovis': {'tau': 0.30, 'temp': 0.10},
    'internvl': {'tau': 0.60, 'temp': 0.50},
}

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'apps': {
            'handlers': ['console'],
            'level': env('NEPT_LOG_LEVEL', default='WARNING'),
            'propagate': False,
        },
    },
}
