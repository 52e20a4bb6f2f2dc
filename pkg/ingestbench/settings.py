import os
import sys
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('BENCH_SECRET_KEY', 'replace-me-in-production')

DEBUG = False

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'rest_framework',
    'bench',
]

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
}

# Harness defaults; see bench.config.harness_setting
INGEST_BENCH = {
    'OUTPUT_DIR': os.environ.get('BENCH_OUTPUT_DIR', str(BASE_DIR / 'runs')),
    'TABLE_NAME': 'Tgraph',
    'AVERAGING_WINDOW': 30.0,
    'LINEAR_TOLERANCE': 0.30,
    'SLOPE_RANGE': (-0.85, -0.40),
    'SLOPE_MIN_SCALE': 14,
}

TESTING = len(sys.argv) > 1 and sys.argv[1] == 'test'

LOG_LEVEL = 'WARNING' if TESTING else os.environ.get('BENCH_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(asctime)s %(levelname)s %(name)s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'bench': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
