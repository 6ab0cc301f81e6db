"""
Django settings for the Adaptive-Gravity project
"""

import os
from pathlib import Path

# .env Datei laden für Development
from dotenv import load_dotenv
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SECRET_KEY', 'django-insecure-agrav-local-only')

DEBUG = os.environ.get('DEBUG', 'True').lower() == 'true'

ALLOWED_HOSTS = os.environ.get('ALLOWED_HOSTS', 'localhost,127.0.0.1').split(',')

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third Party Apps
    'rest_framework',

    # Local Apps
    'gravity.apps.GravityConfig',
]

MIDDLEWARE = []

ROOT_URLCONF = 'backend.urls'

# Database: wird nicht genutzt, Django verlangt aber eine Konfiguration
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization
LANGUAGE_CODE = 'de-de'
TIME_ZONE = 'Europe/Berlin'
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Adaptive-Gravity Settings
GRAVITY_OUTPUT_DIR = os.environ.get('GRAVITY_OUTPUT_DIR', str(BASE_DIR / 'runs'))
GRAVITY_EVAL_BATCH_SIZE = int(os.environ.get('GRAVITY_EVAL_BATCH_SIZE', '256'))
GRAVITY_EVAL_WORKERS = int(os.environ.get('GRAVITY_EVAL_WORKERS', '1'))
GRAVITY_NAN_GUARD = os.environ.get('GRAVITY_NAN_GUARD', 'True').lower() == 'true'
GRAVITY_LOG_LEVEL = os.environ.get('GRAVITY_LOG_LEVEL', 'INFO').upper()

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
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
        'gravity': {
            'handlers': ['console'],
            'level': GRAVITY_LOG_LEVEL,
            'propagate': False,
        },
    },
}
