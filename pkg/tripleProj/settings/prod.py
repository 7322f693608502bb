from decouple import config

from .base import *
from .logging import default_logging_config

DEBUG = False

LOGGING = default_logging_config(config("TRIPLED_LOG_LEVEL", default="INFO"))
