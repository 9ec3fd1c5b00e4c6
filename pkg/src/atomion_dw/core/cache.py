"""물리 입력의 content hash 로 키를 잡는 배열 캐시.

- 메모리 캐시는 프로세스 전역 dict + Lock (이중 확인 패턴)
- 디스크 캐시는 `<cache_dir>/<key>.npz`
- 저장된 배열을 그대로 돌려주며, 근사 재계산은 하지 않습니다.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from atomion_dw.core.json_safety import to_jsonable

logger = logging.getLogger(__name__)

_MEMORY_CACHE: dict[str, dict[str, np.ndarray]] = {}
_MEMORY_LOCK = threading.Lock()


def content_hash(payload: Any) -> str:
    canonical = json.dumps(
        to_jsonable(payload), sort_keys=True, separators=(",", ":"), allow_nan=True
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def clear_memory_cache() -> None:
    with _MEMORY_LOCK:
        _MEMORY_CACHE.clear()


class ArrayCache:
    def __init__(self, directory: Optional[Path] = None, enabled: bool = True) -> None:
        self.directory = Path(directory) if directory is not None else None
        self.enabled = enabled
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> Optional[Path]:
        if self.directory is None:
            return None
        return self.directory / f"{key}.npz"

    def get(self, key: str) -> Optional[dict[str, np.ndarray]]:
        if not self.enabled:
            return None
        with _MEMORY_LOCK:
            cached = _MEMORY_CACHE.get(key)
        if cached is not None:
            self.hits += 1
            return cached

        path = self._path(key)
        if path is not None and path.exists():
            try:
                with np.load(path, allow_pickle=False) as data:
                    arrays = {name: np.array(data[name]) for name in data.files}
            except Exception:
                logger.warning("캐시 파일을 읽지 못해 무시합니다: %s", path)
                return None
            with _MEMORY_LOCK:
                _MEMORY_CACHE.setdefault(key, arrays)
            self.hits += 1
            return arrays
        return None

    def put(self, key: str, arrays: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        stored = {name: np.asarray(value) for name, value in arrays.items()}
        if not self.enabled:
            return stored
        with _MEMORY_LOCK:
            _MEMORY_CACHE[key] = stored

        path = self._path(key)
        if path is None:
            return stored
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(f"{path.stem}.{os.getpid()}.tmp.npz")
        np.savez(tmp, **stored)
        os.replace(tmp, path)
        return stored

    def get_or_compute(
        self, key: str, compute: Callable[[], dict[str, np.ndarray]]
    ) -> dict[str, np.ndarray]:
        cached = self.get(key)
        if cached is not None:
            logger.debug("cache hit %s", key[:12])
            return cached
        self.misses += 1
        return self.put(key, compute())
