"""Serialization of reports and survey tables for standard output or files."""

import json
import math
from pathlib import Path
from typing import Any

from core.survey import SurveyRecord, records_frame

FLOAT_FORMAT = "%.8f"


def _clean(value: Any) -> Any:
    # JSON has no inf / nan
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def to_json(payload: Any) -> str:
    return json.dumps(_clean(payload), indent=2)


def to_text(payload: Any, indent: int = 0) -> str:
    """Plain key: value listing of a (nested) payload."""
    pad = "  " * indent
    if isinstance(payload, dict):
        lines = []
        for key, value in payload.items():
            if isinstance(value, (dict, list)) and value:
                lines.append(f"{pad}{key}:")
                lines.append(to_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {value}")
        return "\n".join(lines)
    if isinstance(payload, list):
        if all(not isinstance(v, (dict, list)) for v in payload):
            return f"{pad}{', '.join(str(v) for v in payload)}"
        return "\n".join(f"{pad}-\n{to_text(v, indent + 1)}" for v in payload)
    return f"{pad}{payload}"


def records_to_csv(records: list[SurveyRecord]) -> str:
    """Survey records as CSV in (p, g) order, floats with 8 decimals, missing ranks empty."""
    return records_frame(records).to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")


def write_text(path: str | Path, content: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(content if content.endswith("\n") else content + "\n", encoding="utf-8")
    return target
