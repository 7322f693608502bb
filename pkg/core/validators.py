# core/validators.py

import math
import re
from typing import Mapping

from django.core.exceptions import ValidationError
from django.core.validators import RegexValidator


# ────────────────────────────────────────────────────────────────
# Problem names
#   - lowercase identifier: letter first, then letters/digits/underscore
#   - 2–48 chars
# ────────────────────────────────────────────────────────────────

PROBLEM_NAME_REGEX = re.compile(r"^[a-z][a-z0-9_]{1,47}$")


problem_name_validator = RegexValidator(
    regex=PROBLEM_NAME_REGEX,
    message=(
        "Invalid problem name. Use 2–48 lowercase characters: letters, "
        "digits or underscores, starting with a letter."
    ),
    code="invalid_problem_name",
)


def validate_problem_name(value: str) -> str:
    """Normalize whitespace/case and enforce the identifier pattern."""
    name = (value or "").lower().strip()
    problem_name_validator(name)
    return name


# ────────────────────────────────────────────────────────────────
# Problem parameters
#   Supplied keys must be declared by the registry entry, values must be
#   finite reals. Undeclared keys are rejected rather than ignored.
# ────────────────────────────────────────────────────────────────

def validate_problem_parameters(
    defaults: Mapping[str, float],
    supplied: Mapping[str, float] | None,
) -> dict[str, float]:
    """
    Merge supplied parameters over the registry defaults.

    Raises ValidationError (code ``unknown_parameter`` or
    ``invalid_parameter``) naming the offending key.
    """
    merged = dict(defaults)
    for key, raw in (supplied or {}).items():
        if key not in defaults:
            allowed = ", ".join(sorted(defaults)) or "none"
            raise ValidationError(
                f"Unknown parameter '{key}'. Allowed: {allowed}.",
                code="unknown_parameter",
            )
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ValidationError(
                f"Parameter '{key}' must be a real number, got {raw!r}.",
                code="invalid_parameter",
            )
        if not math.isfinite(value):
            raise ValidationError(
                f"Parameter '{key}' must be finite, got {raw!r}.",
                code="invalid_parameter",
            )
        merged[key] = value
    return merged
