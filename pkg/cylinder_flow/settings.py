"""
Django settings for cylinder_flow project.

Vortex-method simulator for 2D Euler / Navier-Stokes flow on the infinite
cylinder, with confinement diagnostics and bound replays.
Environment values are read with python-decouple; the run registry database
comes from DATABASE_URL (SQLite when unset).
"""

from pathlib import Path

import dj_database_url
from decouple import Csv, config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# =============================================================================
# Security Settings
# =============================================================================

SECRET_KEY = config('SECRET_KEY', default='django-insecure-dev-key-change-in-production')

DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1', cast=Csv())


# =============================================================================
# Application Definition
# =============================================================================

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    # Local apps
    'vortices.apps.VorticesConfig',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'cylinder_flow.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'cylinder_flow.wsgi.application'


# =============================================================================
# Database Configuration (run registry)
# =============================================================================

DATABASE_URL = config('DATABASE_URL', default='')

if DATABASE_URL:
    DATABASES = {
        'default': dj_database_url.parse(
            DATABASE_URL,
            conn_max_age=600,
            conn_health_checks=True,
        )
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': BASE_DIR / 'db.sqlite3',
        }
    }


# =============================================================================
# Internationalization
# =============================================================================

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True


# =============================================================================
# Static Files (admin only)
# =============================================================================

STATIC_URL = '/static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'


# =============================================================================
# Default Primary Key
# =============================================================================

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# =============================================================================
# Authentication Settings
# =============================================================================

LOGIN_URL = '/admin/login/'


# =============================================================================
# Logging
# =============================================================================

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'vortices': {
            'handlers': ['console'],
            'level': config('VORTEX_LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
    },
}


# =============================================================================
# Simulator Settings
# =============================================================================

# Default root for run outputs when a config names a relative output_dir
VORTEX_OUTPUT_ROOT = Path(config('VORTEX_OUTPUT_ROOT', default=str(BASE_DIR / 'runs')))

# Threads used for the per-target velocity sums
VORTEX_MAX_WORKERS = config('VORTEX_MAX_WORKERS', default=1, cast=int)

# Seeds integrated concurrently in ns mode
VORTEX_SEED_PARALLELISM = config('VORTEX_SEED_PARALLELISM', default=1, cast=int)

# Targets per kernel block; fixed so reductions never depend on thread count
VORTEX_TARGET_CHUNK = config('VORTEX_TARGET_CHUNK', default=256, cast=int)

# Grid size used when certifying the decay envelope for a run manifest
VORTEX_ENVELOPE_SAMPLES = config('VORTEX_ENVELOPE_SAMPLES', default=10000, cast=int)

# Bound certificates keep per-step terms only up to this many iterations
VORTEX_MAX_STEP_TERMS = config('VORTEX_MAX_STEP_TERMS', default=100000, cast=int)

# Long acceptance runs (minutes each) are skipped unless enabled
VORTEX_RUN_SLOW_TESTS = config('VORTEX_RUN_SLOW_TESTS', default=False, cast=bool)
