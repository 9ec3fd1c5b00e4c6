from __future__ import annotations

import os
from pathlib import Path

_TIERS = {"acceptance", "paper"}


def _env_flag(name: str, default: str = "false") -> bool:
    return (os.getenv(name, default) or "").lower().strip() in {"1", "true", "yes", "y"}


def debug_enabled() -> bool:
    return _env_flag("DEBUG")


def debug_errors_enabled() -> bool:
    return os.getenv("DEBUG_ERRORS", "false").lower() not in {"0", "false", "no"}


def get_threads() -> int:
    """ATOMION_THREADS 환경변수 (기본값: CPU 수, 최대 8)."""
    raw = (os.getenv("ATOMION_THREADS") or "").strip()
    if not raw:
        return max(1, min(8, os.cpu_count() or 1))
    try:
        value = int(raw)
    except ValueError as e:
        raise ValueError(f"Invalid ATOMION_THREADS: {raw!r}") from e
    if value < 1:
        raise ValueError(f"Invalid ATOMION_THREADS: {raw!r}")
    return value


def get_cache_dir() -> Path:
    raw = (os.getenv("ATOMION_CACHE_DIR") or "").strip()
    return Path(raw) if raw else Path(".atomion_cache")


def get_default_tier() -> str:
    raw = (os.getenv("ATOMION_TIER") or "acceptance").strip().lower()
    if raw not in _TIERS:
        raise ValueError(f"Invalid ATOMION_TIER: {raw!r}")
    return raw
