from pathlib import Path

import environ

BASE_DIR = Path(__file__).resolve().parent.parent

env = environ.Env(
    DEBUG=(bool, False),
    FACTCHECK_THREADS=(int, 1),
    FACTCHECK_LOG_LEVEL=(str, "INFO"),
)
environ.Env.read_env(BASE_DIR / ".env")

SECRET_KEY = env("SECRET_KEY", default="factcheck-local-only")
DEBUG = env("DEBUG")
ALLOWED_HOSTS = []

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    # Local apps
    "apps.knowledge",
    "apps.factcheck",
    "apps.baselines",
]

DATABASES = {
    "default": env.db("DATABASE_URL", default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}"),
}

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Pipeline defaults; command flags and --config files override these
FACTCHECK = {
    "MAX_PATH_LENGTH": 3,
    "DELTA_TOP": 100,
    "DELTA": None,
    "THETA": 15.0,
    "FOLDS": 10,
    "TRUE_RATIO": 0.2,
    "SEED": 0,
    "L2": 1.0,
    "MAX_ITER": 10000,
    "GRADIENT_TOL": 1e-6,
    "HUB_CAP": None,
    "THREADS": env("FACTCHECK_THREADS"),
    "FEATURE_MODE": "anchored",
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "simple",
        },
    },
    "loggers": {
        "apps": {
            "handlers": ["console"],
            "level": env("FACTCHECK_LOG_LEVEL"),
            "propagate": False,
        },
    },
}
