from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from atomion_dw.core.cache import ArrayCache, content_hash
from atomion_dw.core.errors import (
    EXIT_CONFIG,
    EXIT_CONVERGENCE,
    EXIT_NUMERICAL,
    EXIT_UNEXPECTED,
    BasisSupportWarning,
    ConfigError,
    DomainError,
    SolverError,
    exit_code_for,
)
from atomion_dw.core.json_safety import to_jsonable
from atomion_dw.core.settings import get_cache_dir, get_threads
from atomion_dw.core.workers import parallel_map


def test_content_hash_ignores_key_order():
    a = content_hash({"omega": 1.0, "phases": [0.1, -0.2], "kind": "1d"})
    b = content_hash({"kind": "1d", "phases": [0.1, -0.2], "omega": 1.0})
    assert a == b
    assert a != content_hash({"kind": "1d", "phases": [0.1, -0.2], "omega": 1.0 + 1e-15})


def test_disabled_cache_always_computes(tmp_path):
    cache = ArrayCache(tmp_path, enabled=False)
    calls = []

    def compute():
        calls.append(1)
        return {"x": np.arange(3.0)}

    cache.get_or_compute("k", compute)
    cache.get_or_compute("k", compute)
    assert len(calls) == 2
    assert not list(tmp_path.iterdir())


def test_disk_cache_survives_memory_clear(tmp_path):
    from atomion_dw.core.cache import clear_memory_cache

    ArrayCache(tmp_path).put("key", {"e": np.array([1.5, 2.5])})
    clear_memory_cache()
    fresh = ArrayCache(tmp_path)
    out = fresh.get_or_compute("key", lambda: pytest.fail("should not recompute"))
    np.testing.assert_array_equal(out["e"], [1.5, 2.5])
    assert (fresh.hits, fresh.misses) == (1, 0)


def test_threads_from_env(monkeypatch):
    monkeypatch.setenv("ATOMION_THREADS", "3")
    assert get_threads() == 3
    for bad in ("0", "many"):
        monkeypatch.setenv("ATOMION_THREADS", bad)
        with pytest.raises(ValueError):
            get_threads()


def test_cache_dir_from_env(monkeypatch, tmp_path):
    monkeypatch.setenv("ATOMION_CACHE_DIR", str(tmp_path / "c"))
    assert get_cache_dir() == tmp_path / "c"


def test_parallel_map_keeps_order():
    def slow_square(x):
        time.sleep(0.002 * (5 - x))
        return x * x

    assert parallel_map(slow_square, range(6), threads=4) == [0, 1, 4, 9, 16, 25]
    assert parallel_map(slow_square, [], threads=4) == []


@dataclass
class _Point:
    d: float
    label: str


def test_to_jsonable():
    out = to_jsonable(
        {
            "nan": math.nan,
            "arr": np.array([1.0, 2.0]),
            "np": np.float64(0.25),
            "point": _Point(2.5, "|0>+"),
            "path": Path("a") / "b.csv",
            "z": 1 + 2j,
            1: {3, 1, 2},
        }
    )
    assert out["nan"] == "nan"
    assert out["arr"] == [1.0, 2.0]
    assert out["np"] == 0.25
    assert out["point"] == {"d": 2.5, "label": "|0>+"}
    assert out["path"] == "a/b.csv"
    assert out["z"] == {"re": 1.0, "im": 2.0}
    assert out["1"] == [1, 2, 3]


@pytest.mark.parametrize(
    "exc, code",
    [
        (ConfigError("x"), EXIT_CONFIG),
        (DomainError("x"), EXIT_NUMERICAL),
        (SolverError("x"), EXIT_NUMERICAL),
        (BasisSupportWarning("x"), EXIT_CONVERGENCE),
        (KeyError("x"), EXIT_UNEXPECTED),
    ],
)
def test_exit_codes(exc, code):
    assert exit_code_for(exc) == code
