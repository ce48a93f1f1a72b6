"""
Test settings.
"""

from .base import *  # noqa: F401,F403

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': ':memory:',
    }
}

# Keep the suite independent of the developer's environment
NEPT.update({  # noqa: F405
    'GROUNDER': 'oracle',
    'ENDPOINT': '',
    'TASK': 'vqa',
    'TAU': 0.25,
    'GAMMA': 0.25,
    'RELATE_LITERAL': False,
    'GRADIENTS': False,
    'STEP_BUDGET': 100_000,
    'CALL_BUDGET': 1_000,
    'REMOTE_TIMEOUT': 5.0,
    'REMOTE_RETRIES': 2,
    'GATE_PRESET': '',
    'GATE_TAU': 0.5,
    'GATE_TEMP': 1.0,
    'SEED': 0,
    'JOBS': 1,
    'ANALOGICAL_INCLUDE_SELF': False,
    'SCENE_DIR': str(BASE_DIR / 'sample_data' / 'scenes'),  # noqa: F405
    'SERVICE_EMIT_LOGITS': False,
    'NOISE': 0.0,
})

LOGGING['loggers']['apps']['level'] = 'CRITICAL'  # noqa: F405
