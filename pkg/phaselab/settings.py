"""
Django settings for the PhaseLab project.

Process-level settings are read from the environment (a local .env file is
loaded first). Numerical tolerances live in PHASELAB and can be overridden one
by one with PHASELAB_<NAME> variables.
"""
import os
from pathlib import Path
from dotenv import load_dotenv
load_dotenv()
# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv("SECRET_KEY", "phaselab-dev-only-key")

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.getenv("DEBUG", "false").lower() in ("1", "true", "yes")

ALLOWED_HOSTS = os.getenv("ALLOWED_HOSTS", "*").split(",")

CORS_ALLOW_ALL_ORIGINS = True


# Application definition

INSTALLED_APPS = [
    'corsheaders',
    'wigner',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'corsheaders.middleware.CorsMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'phaselab.urls'

WSGI_APPLICATION = 'phaselab.wsgi.application'


# Runs write files, not rows: no database is configured.
DATABASES = {}


USE_TZ = True

TIME_ZONE = 'UTC'


# Numerical tolerances and limits, see wigner.lab.conf.
def _env_number(name, default):
    raw = os.getenv(f"PHASELAB_{name}")
    if raw is None:
        return default
    return type(default)(float(raw)) if isinstance(default, int) else float(raw)


PHASELAB = {
    name: _env_number(name, default)
    for name, default in {
        "NORM_TOLERANCE": 1e-8,
        "HERMITIAN_TOLERANCE": 1e-10,
        "IMAG_RESIDUE": 1e-12,
        "BOUNDARY_DECAY": 1e-10,
        "POSITIVITY_FACTOR": 1e-6,
        "POSITIVITY_SUSTAIN": 10,
        "SUPPORT_MASS": 0.99,
        "SUPPORT_SLACK": 0.9,
        "PURITY_TOLERANCE": 2e-3,
        "MAX_POLY_DEGREE": 8,
        "MAX_STAR_ORDER": 6,
        "STABILITY_SAFETY": 0.2,
        "NORM_ABORT": 1e-4,
        "CLIP_MASS_LIMIT": 1e-8,
        "ADDITIVITY_TOLERANCE": 1e-10,
    }.items()
}

# Worker count for parameter sweeps; the only environment variable a run reads.
PHASELAB_THREADS = int(os.getenv("PHASELAB_THREADS", "1"))


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "wigner": {
            "handlers": ["console"],
            "level": os.getenv("PHASELAB_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}
