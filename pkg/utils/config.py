"""
Configuration for the rainbow chain laboratory

Defaults live in DEFAULT_CONFIG. A run configuration is built by layering
environment variables, an optional JSON file and explicit overrides (usually
command-line flags) on top of the defaults.
"""

import json
import os
from typing import Any, Dict, Optional

from utils.errors import InvalidParameterError

DEFAULT_CONFIG: Dict[str, Any] = {
    "J0": 1.0,
    "fermi_degeneracy_tol": 1e-10,
    "clamp_eps": 1e-12,
    "validity_window": 1e-9,
    "underflow_exponent": 700.0,
    "luttinger_K": 1.0,
    "condition_warning": 1e8,
    "float_digits": 12,
    "workers": 1,
    "database_url": None,
    "log_level": "INFO",
}

# Environment variable -> config key
ENVIRONMENT_KEYS = {
    "RAINBOW_DATABASE_URL": "database_url",
    "RAINBOW_WORKERS": "workers",
    "RAINBOW_LOG_LEVEL": "log_level",
}


def _coerce(key: str, value: Any) -> Any:
    default = DEFAULT_CONFIG[key]
    if value is None or default is None:
        return value
    try:
        if isinstance(default, bool):
            return bool(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except (TypeError, ValueError) as e:
        raise InvalidParameterError(
            f"Config key '{key}' has invalid value {value!r}",
            details={"key": key, "value": str(value)},
        ) from e
    return value


def load_config(path: Optional[str] = None,
                overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Build a run configuration

    Args:
        path: Optional JSON file with a flat object of config keys
        overrides: Values that win over everything else; None entries are ignored

    Returns:
        Dict: A fresh configuration dictionary
    """
    config = dict(DEFAULT_CONFIG)

    for env_name, key in ENVIRONMENT_KEYS.items():
        if env_name in os.environ:
            config[key] = _coerce(key, os.environ[env_name])

    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                file_values = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidParameterError(
                f"Cannot read config file {path}: {e}",
                details={"path": str(path)},
            ) from e
        if not isinstance(file_values, dict):
            raise InvalidParameterError("Config file must hold a JSON object",
                                        details={"path": str(path)})
        unknown = sorted(set(file_values) - set(DEFAULT_CONFIG))
        if unknown:
            raise InvalidParameterError(f"Unknown config keys: {', '.join(unknown)}",
                                        details={"unknown": unknown})
        for key, value in file_values.items():
            config[key] = _coerce(key, value)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in DEFAULT_CONFIG:
            raise InvalidParameterError(f"Unknown config key: {key}",
                                        details={"unknown": [key]})
        config[key] = _coerce(key, value)

    return config
