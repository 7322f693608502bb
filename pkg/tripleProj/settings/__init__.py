from decouple import config

# ────────────────────────────────────────────────────────────────
# Determine active environment (dev, prod)
# ────────────────────────────────────────────────────────────────
ENVIRONMENT = config("TRIPLED_ENV", default="dev").strip().lower()

# Sanity check: only allow known environments
VALID_ENVIRONMENTS = {"dev", "prod"}

if ENVIRONMENT not in VALID_ENVIRONMENTS:
    raise ValueError(
        f"Invalid TRIPLED_ENV='{ENVIRONMENT}'. "
        f"Must be one of: {', '.join(sorted(VALID_ENVIRONMENTS))}"
    )

# ────────────────────────────────────────────────────────────────
# Load settings based on environment
# ────────────────────────────────────────────────────────────────
if ENVIRONMENT == "prod":
    from .prod import *
else:
    from .dev import *

ACTIVE_ENV = ENVIRONMENT
