"""
Helper Utility Functions
"""
import json
import math
from typing import Any, List, Sequence, Tuple


def _jsonable(value: Any) -> Any:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return _jsonable(value.item())
    return value


def dump_json(obj: Any) -> str:
    """
    Deterministic JSON text: insertion order kept, non-finite floats spelled out
    """
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def format_float(value: Any, digits: int = 6) -> str:
    """Short float rendering for markdown tables"""
    if value is None:
        return "-"
    if isinstance(value, str):
        return value
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}g}"


def certified_runs(values: Sequence[float], flags: Sequence[bool]) -> List[Tuple[float, float]]:
    """
    Maximal runs of consecutive flagged grid values as closed [lo, hi] pairs
    """
    runs: List[Tuple[float, float]] = []
    start = None
    for i, flag in enumerate(flags):
        if flag and start is None:
            start = i
        if not flag and start is not None:
            runs.append((values[start], values[i - 1]))
            start = None
    if start is not None:
        runs.append((values[start], values[len(flags) - 1]))
    return runs
