from pathlib import Path

from decouple import config

# ────────────────────────────────────────────────────────────────
# Base Directories
# ────────────────────────────────────────────────────────────────
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# ────────────────────────────────────────────────────────────────
# Security / Secret Key
# ────────────────────────────────────────────────────────────────
# Nothing is served; Django still refuses to start without a key.
SECRET_KEY = config(
    "TRIPLED_SECRET_KEY",
    default="dev-only-7q1m$z!x0c4u@t9v2e#k8r5n",
)

# ────────────────────────────────────────────────────────────────
# Installed Applications
# ────────────────────────────────────────────────────────────────
INSTALLED_APPS = [
    # Internal Apps
    "core",
]

# ────────────────────────────────────────────────────────────────
# Database
# ────────────────────────────────────────────────────────────────
# The solver keeps no state between runs; every artifact is a file.
DATABASES = {}

# ────────────────────────────────────────────────────────────────
# Internationalization
# ────────────────────────────────────────────────────────────────
LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True

# ────────────────────────────────────────────────────────────────
# Solver runtime
# ────────────────────────────────────────────────────────────────
# Default directory for solution.csv / report.json / ... when a run
# config does not name one.
TRIPLED_OUTPUT_DIR = config("TRIPLED_OUTPUT_DIR", default=str(BASE_DIR / "runs"))

# Threads used by operators.apply_T (one task per component).
TRIPLED_WORKERS = config("TRIPLED_WORKERS", default=1, cast=int)

# Upper bound on rows × samples held in memory by one quadrature chunk.
TRIPLED_QUAD_CHUNK = config("TRIPLED_QUAD_CHUNK", default=2**21, cast=int)
