import json
from pathlib import Path
from typing import Any, Mapping

from pydantic import ValidationError as SchemaError

from core.exceptions import ConfigError
from core.schemas import RunConfig


# -------------------------------------------------------------------
# FLAG → CONFIG KEY
# -------------------------------------------------------------------
FLAG_KEYS = {
    "tol": "solve.tol",
    "max_iter": "solve.max_iter",
    "t_max": "grid.t_max",
    "n_nodes": "grid.n_nodes",
    "problem": "problem.name",
    "seed": "seed",
    "output_dir": "output_dir",
    "retain_trace": "retain_trace",
}


def _set_dotted(data: dict, dotted: str, value: Any) -> None:
    *parents, leaf = dotted.split(".")
    node = data
    for key in parents:
        child = node.get(key)
        if not isinstance(child, dict):
            child = node[key] = {}
        node = child
    node[leaf] = value


def _read_document(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror or exc})")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def format_schema_errors(exc: SchemaError) -> str:
    """One ``dotted.key: message`` line per validation error."""
    lines = []
    for err in exc.errors():
        key = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"{key}: {err['msg']}")
    return "\n".join(lines)


# -------------------------------------------------------------------
# LOADING
# -------------------------------------------------------------------
def load_run_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """
    Read a JSON run config (all keys optional) and apply flag overrides.

    ``overrides`` maps flag names (see FLAG_KEYS) to values; ``None`` values
    are ignored. Raises ConfigError with line/column context for malformed
    JSON and dotted keys for schema errors.
    """
    data = _read_document(path) if path else {}
    for flag, value in (overrides or {}).items():
        if value is None:
            continue
        if flag not in FLAG_KEYS:
            raise ConfigError(f"unknown override '{flag}'")
        _set_dotted(data, FLAG_KEYS[flag], value)

    try:
        return RunConfig.model_validate(data)
    except SchemaError as exc:
        raise ConfigError(format_schema_errors(exc))
