"""
Django settings for the orliczlab project.

OrliczLab has no web surface: Django hosts the apps, the management-command
CLI, the logging configuration and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured
import dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

dotenv.load_dotenv(BASE_DIR / ".env")

DEBUG = os.environ.get("ORLICZLAB_DEBUG", "False").lower() == "true"

# Define the persistent data path
DATA_PATH = os.environ.get("ORLICZLAB_DATA_PATH")
if DATA_PATH:
    DATA_PATH = Path(DATA_PATH)
else:
    DATA_PATH = BASE_DIR

# Where commands write their CSV files and run manifests
OUTPUT_PATH = Path(os.environ.get("ORLICZLAB_OUTPUT_PATH", DATA_PATH / "runs"))

# Regression ceilings for the lemma ratio suite
CEILINGS_PATH = Path(
    os.environ.get("ORLICZLAB_CEILINGS_PATH", BASE_DIR / "lab" / "ceilings.json")
)

# Only used by Django internals that insist on a key; nothing is signed.
SECRET_KEY = os.environ.get("ORLICZLAB_SECRET_KEY", "orliczlab-offline-no-signing")

SHELL_POLICIES = ("omit", "taylor")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def get_configuration_help_message(name, value, accepted):
    msg = ["\n" + "=" * 80, "ORLICZLAB CONFIGURATION ERROR", "=" * 80]
    msg.extend(
        [
            f"- INVALID: {name}={value!r}",
            f"  Accepted values: {accepted}",
            "",
            "Unset the variable to fall back to the default.",
        ]
    )
    return "\n".join(msg)


def _read_int(name, default, minimum):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw, 0)
    except ValueError:
        value = None
    if value is None or value < minimum:
        raise ImproperlyConfigured(
            get_configuration_help_message(name, raw, f"an integer >= {minimum}")
        )
    return value


# Worker pool size for pair-sum blocks and ladder points
DEFAULT_THREADS = _read_int("ORLICZLAB_THREADS", 1, 1)

# Seed for every randomized property check
DEFAULT_SEED = _read_int("ORLICZLAB_SEED", 20240917, 0)

DEFAULT_SHELL_POLICY = os.environ.get("ORLICZLAB_SHELL_POLICY", "taylor").lower()
if DEFAULT_SHELL_POLICY not in SHELL_POLICIES:
    raise ImproperlyConfigured(
        get_configuration_help_message(
            "ORLICZLAB_SHELL_POLICY", DEFAULT_SHELL_POLICY, ", ".join(SHELL_POLICIES)
        )
    )

LOG_LEVEL = os.environ.get("ORLICZLAB_LOG_LEVEL", "INFO").upper()
if LOG_LEVEL not in LOG_LEVELS:
    raise ImproperlyConfigured(
        get_configuration_help_message(
            "ORLICZLAB_LOG_LEVEL", LOG_LEVEL, ", ".join(LOG_LEVELS)
        )
    )

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    "orlicz.apps.OrliczConfig",
    "fields.apps.FieldsConfig",
    "modulars.apps.ModularsConfig",
    "limits.apps.LimitsConfig",
    "solver.apps.SolverConfig",
    "lab.apps.LabConfig",
    "cli.apps.CliConfig",
]

# No models, so no database is configured.
DATABASES = {}

# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Logging
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        }
        for app in ("orlicz", "fields", "modulars", "limits", "solver", "lab", "cli")
    },
}
