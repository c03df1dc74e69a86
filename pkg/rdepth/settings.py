"""
Django settings for the r-DepTH toolkit
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('SECRET_KEY', 'rdepth-offline-toolkit')
DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'
ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'core',
    'volumes',
    'bands',
    'deform',
    'collage',
    'survival',
    'synth',
    'pipeline',
]

# Batch toolkit - no database
DATABASES = {}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Logging
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
        'jsonl': {
            '()': 'core.logging.JsonLinesFormatter',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
}

# Band settings
RDEPTH_BAND_WIDTH_MM = float(os.getenv('RDEPTH_BAND_WIDTH_MM', '5.0'))
RDEPTH_BAND_COUNT = int(os.getenv('RDEPTH_BAND_COUNT', '12'))
RDEPTH_MIN_BAND_VOXELS = int(os.getenv('RDEPTH_MIN_BAND_VOXELS', '10'))

# COLLAGE settings
COLLAGE_WINDOW = int(os.getenv('COLLAGE_WINDOW', '5'))
COLLAGE_BINS = int(os.getenv('COLLAGE_BINS', '64'))
COLLAGE_MIN_ROI_VOXELS = int(os.getenv('COLLAGE_MIN_ROI_VOXELS', '10'))

# Survival settings
SURVIVAL_FOLDS = int(os.getenv('SURVIVAL_FOLDS', '5'))
SURVIVAL_N_LAMBDA = int(os.getenv('SURVIVAL_N_LAMBDA', '30'))
SURVIVAL_LAMBDA_RATIO = float(os.getenv('SURVIVAL_LAMBDA_RATIO', '0.01'))
SURVIVAL_SEED = int(os.getenv('SURVIVAL_SEED', '0'))
SURVIVAL_MAX_SWEEPS = int(os.getenv('SURVIVAL_MAX_SWEEPS', '10000'))
SURVIVAL_TOLERANCE = float(os.getenv('SURVIVAL_TOLERANCE', '1e-7'))

# Pipeline settings
PIPELINE_WORKERS = int(os.getenv('PIPELINE_WORKERS', '1'))
