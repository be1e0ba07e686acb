import os
from pathlib import Path
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(os.path.join(BASE_DIR, '.env'))

SECRET_KEY = os.getenv('SECRET_KEY', 'dev-secret-key-not-used-by-batch-jobs')
DEBUG = os.getenv('DEBUG', 'False') == 'True'
ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'dualities',
]

# Batch jobs only; nothing is persisted apart from the golden directory.
DATABASES = {}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
}

DUALITYKIT_CAP = int(os.getenv('DUALITYKIT_CAP', '4096'))
DUALITYKIT_TOL_EXACT = float(os.getenv('DUALITYKIT_TOL_EXACT', '1e-12'))
DUALITYKIT_TOL_EIGEN = float(os.getenv('DUALITYKIT_TOL_EIGEN', '1e-10'))
DUALITYKIT_SEED = int(os.getenv('DUALITYKIT_SEED', '0'))
DUALITYKIT_GOLDEN_DIR = Path(os.getenv('DUALITYKIT_GOLDEN_DIR', str(BASE_DIR / 'dualities' / 'golden')))

RUN_TASK_INLINE = os.getenv('RUN_TASK_INLINE', 'True') == 'True'

CELERY_BROKER_URL = os.getenv('REDIS_URL', 'redis://localhost:6379/0')
CELERY_RESULT_BACKEND = os.getenv('REDIS_URL', 'redis://localhost:6379/0')
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'

LOG_LEVEL = os.getenv('DUALITYKIT_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {'format': '%(asctime)s %(levelname)s %(name)s: %(message)s'},
    },
    'handlers': {
        # stderr keeps stdout clean for machine-readable reports
        'console': {'class': 'logging.StreamHandler', 'formatter': 'plain'},
    },
    'root': {'handlers': ['console'], 'level': 'WARNING'},
    'loggers': {
        'dualities': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
    },
}
