"""Conversion of library objects to plain JSON-compatible data."""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .spaces import INF, Extended, SpaceSpec, format_exponent


def _float(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def to_jsonable(obj):
    """Recursively convert arrays, dataclasses, enums and INF into JSON data."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, Extended):
        return "inf"
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        if obj.dtype.kind == "f" and not np.all(np.isfinite(obj)):
            return [to_jsonable(v) for v in obj.tolist()]
        return obj.tolist()
    if isinstance(obj, SpaceSpec):
        return {"exponent": format_exponent(obj.exponent) if obj.exponent is INF else obj.exponent,
                "dim": obj.dim}
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")
