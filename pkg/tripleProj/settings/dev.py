from decouple import config

from .base import *
from .logging import default_logging_config

# ─────────────────────────────────────────────────────────────
# Environment
# ─────────────────────────────────────────────────────────────
DEBUG = config("DEBUG", default=True, cast=bool)

# ─────────────────────────────────────────────────────────────
# Logging
# ─────────────────────────────────────────────────────────────
LOGGING = default_logging_config(config("TRIPLED_LOG_LEVEL", default="DEBUG"))
