from __future__ import annotations

import dataclasses
import datetime as _dt
import enum
from pathlib import PurePath
from typing import Any

import numpy as np


def to_jsonable(obj: Any) -> Any:
    """재귀적으로 JSON 직렬화 가능한 타입으로 변환합니다."""
    if obj is None:
        return None

    if isinstance(obj, (str, bool, int)):
        return obj

    if isinstance(obj, float):
        # NaN/inf 는 표준 JSON 이 아니므로 문자열로 남깁니다.
        return obj if np.isfinite(obj) else str(obj)

    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}

    if isinstance(obj, (_dt.datetime, _dt.date, _dt.time)):
        try:
            return obj.isoformat()
        except Exception:
            return str(obj)

    if isinstance(obj, enum.Enum):
        return to_jsonable(obj.value)

    if isinstance(obj, PurePath):
        return obj.as_posix()

    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]

    item = getattr(obj, "item", None)
    if callable(item):
        try:
            return to_jsonable(item())
        except Exception:
            pass

    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
            if f.repr
        }

    model_dump = getattr(obj, "model_dump", None)
    if callable(model_dump):
        try:
            return to_jsonable(model_dump())
        except Exception:
            pass

    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=repr) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]

    return str(obj)
