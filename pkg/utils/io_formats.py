"""
CSV and JSON emission

CSV documents start with a '# units: ...' comment line followed by a header
row; floats carry float_digits significant digits. JSON documents always
carry schema_version.
"""

import json
import sys
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from utils.config import DEFAULT_CONFIG

SCHEMA_VERSION = 1


def csv_text(frame: pd.DataFrame, units: str,
             float_digits: int = DEFAULT_CONFIG["float_digits"]) -> str:
    """Render a table with its units comment."""
    body = frame.to_csv(index=False, float_format=f"%.{int(float_digits)}g", lineterminator="\n")
    return f"# units: {units}\n{body}"


def _json_default(value: Any):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def json_text(document: Dict[str, Any]) -> str:
    document = {"schema_version": SCHEMA_VERSION, **document}
    return json.dumps(document, indent=2, default=_json_default) + "\n"


def emit(text: str, path: Optional[str] = None) -> None:
    """Write text to path, or to stdout when path is None or '-'."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def write_csv(frame: pd.DataFrame, units: str, path: Optional[str] = None,
              float_digits: int = DEFAULT_CONFIG["float_digits"]) -> None:
    emit(csv_text(frame, units, float_digits), path)


def write_json(document: Dict[str, Any], path: Optional[str] = None) -> None:
    emit(json_text(document), path)
