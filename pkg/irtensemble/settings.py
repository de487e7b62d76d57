"""
Django settings for the irtensemble project.

The project has no HTTP surface: Django provides configuration, logging,
the ORM used to store experiment runs, and the management-command CLI.

For more information on this file, see
https://docs.djangoproject.com/en/5.1/topics/settings/
"""
from pathlib import Path

from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='irtensemble-local-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'rest_framework',
    'scoring_app',
    'detector_app',
    'irt_app',
    'combiner_app',
    'synth_app',
    'evaluation_app',
    'cli_app',
]

# Database
# https://docs.djangoproject.com/en/5.1/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': config('DB_NAME', default=str(BASE_DIR / 'irtensemble.sqlite3')),
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Numerical defaults. Every entry can be overridden from the environment.
IRTENSEMBLE = {
    'EPSILON': config('IRTENS_EPSILON', default=0.005, cast=float),
    'MAX_ITER': config('IRTENS_MAX_ITER', default=100, cast=int),
    'TOL': config('IRTENS_TOL', default=1e-6, cast=float),
    'AP_DAMPING': config('IRTENS_AP_DAMPING', default=0.9, cast=float),
    'AP_MAX_ITER': config('IRTENS_AP_MAX_ITER', default=200, cast=int),
    'AP_CONVERGENCE_ITER': config('IRTENS_AP_CONVERGENCE_ITER', default=15, cast=int),
    'OUT_DIR': config('IRTENS_OUT_DIR', default=str(BASE_DIR / 'out')),
}

LOG_LEVEL = config('LOG_LEVEL', default='INFO')

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': config('LOG_FILE', default=str(BASE_DIR / 'irtensemble.log')),
            'formatter': 'verbose',
        },
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console', 'file'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'WARNING',
            'propagate': False,
        },
        **{
            app: {
                'handlers': ['console', 'file'],
                'level': LOG_LEVEL,
                'propagate': False,
            }
            for app in (
                'scoring_app',
                'detector_app',
                'irt_app',
                'combiner_app',
                'synth_app',
                'evaluation_app',
                'cli_app',
            )
        },
    },
}
