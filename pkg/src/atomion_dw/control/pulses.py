"""우물 간 거리 d(t) 펄스: C¹ 기준 램프 + CRAB 보정."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from atomion_dw.core.errors import ConfigError, DomainError
from atomion_dw.core.json_safety import to_jsonable

DEFAULT_D_FLOOR = 1.5
DEFAULT_HARMONICS = 5


def smoothstep(x: np.ndarray) -> np.ndarray:
    """3x² - 2x³ on [0, 1] (C¹)."""
    s = np.clip(x, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


@dataclass(frozen=True)
class BaselineRamp:
    """d_start → d_hold (ramp-in), 유지, d_hold → d_end (ramp-out)."""

    d_start: float
    d_hold: float
    d_end: float
    total_time: float
    ramp_time: float

    def __post_init__(self) -> None:
        if not self.total_time > 0:
            raise DomainError(f"total time must be > 0, got {self.total_time!r}")
        if not 0 < self.ramp_time <= 0.5 * self.total_time:
            raise DomainError(
                f"ramp time must be in (0, T/2], got {self.ramp_time!r} for T={self.total_time!r}"
            )
        if min(self.d_start, self.d_hold, self.d_end) <= 0:
            raise DomainError("ramp separations must be > 0")

    @classmethod
    def constant(cls, d: float, total_time: float) -> "BaselineRamp":
        return cls(d, d, d, total_time, 0.5 * total_time)

    def __call__(self, t: Any) -> np.ndarray:
        ts = np.asarray(t, dtype=float)
        tau = self.ramp_time
        rise = smoothstep(ts / tau)
        fall = smoothstep((ts - (self.total_time - tau)) / tau)
        d = self.d_start + (self.d_hold - self.d_start) * rise
        return d + (self.d_end - self.d_hold) * fall


def crab_frequencies(
    total_time: float, randomization: np.ndarray
) -> np.ndarray:
    """ω_k = (2πk/T)(1 + r_k), k = 1..n."""
    r = np.asarray(randomization, dtype=float)
    k = np.arange(1, r.size + 1)
    return 2.0 * math.pi * k / total_time * (1.0 + r)


@dataclass(frozen=True, eq=False)
class ControlPulse:
    """d(t) = d₀(t) + sin²(πt/T) Σ_k [a_k sin ω_k t + b_k cos ω_k t]."""

    baseline: BaselineRamp
    sin_amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cos_amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0))
    randomization: np.ndarray = field(default_factory=lambda: np.zeros(0))
    d_floor: float = DEFAULT_D_FLOOR
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        n = self.randomization.size
        if self.sin_amplitudes.size != n or self.cos_amplitudes.size != n:
            raise DomainError("CRAB amplitude and frequency counts differ")
        if np.any(np.abs(self.randomization) > 0.5):
            raise DomainError("CRAB frequency randomization must lie in [-0.5, 0.5]")

    @classmethod
    def from_baseline(
        cls, baseline: BaselineRamp, n_harmonics: int = DEFAULT_HARMONICS, **kwargs: Any
    ) -> "ControlPulse":
        zeros = np.zeros(int(n_harmonics))
        return cls(baseline, zeros, zeros.copy(), zeros.copy(), **kwargs)

    @property
    def total_time(self) -> float:
        return self.baseline.total_time

    @property
    def n_harmonics(self) -> int:
        return int(self.randomization.size)

    @property
    def frequencies(self) -> np.ndarray:
        return crab_frequencies(self.total_time, self.randomization)

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.sin_amplitudes, self.cos_amplitudes])

    def with_coefficients(
        self, coefficients: np.ndarray, randomization: Optional[np.ndarray] = None
    ) -> "ControlPulse":
        c = np.asarray(coefficients, dtype=float)
        n = self.n_harmonics if randomization is None else int(np.size(randomization))
        if c.size != 2 * n:
            raise DomainError(f"expected {2 * n} CRAB coefficients, got {c.size}")
        return replace(
            self,
            sin_amplitudes=c[:n].copy(),
            cos_amplitudes=c[n:].copy(),
            randomization=(
                self.randomization
                if randomization is None
                else np.asarray(randomization, dtype=float)
            ),
        )

    def correction(self, t: Any) -> np.ndarray:
        ts = np.asarray(t, dtype=float)
        window = np.sin(math.pi * ts / self.total_time) ** 2
        if self.n_harmonics == 0:
            return np.zeros_like(ts)
        phase = np.multiply.outer(ts, self.frequencies)
        series = np.sin(phase) @ self.sin_amplitudes + np.cos(phase) @ self.cos_amplitudes
        return window * series

    def __call__(self, t: Any) -> np.ndarray:
        return self.baseline(t) + self.correction(t)

    def min_separation(self, n_samples: int = 2001) -> float:
        ts = np.linspace(0.0, self.total_time, n_samples)
        return float(self(ts).min())

    def floor_violation(self, n_samples: int = 2001) -> float:
        """d_floor 아래로 내려간 최대 깊이 (없으면 0)."""
        return max(0.0, self.d_floor - self.min_separation(n_samples))

    def to_dict(self) -> dict[str, Any]:
        b = self.baseline
        return to_jsonable(
            {
                "total_time": b.total_time,
                "baseline": {
                    "d_start": b.d_start,
                    "d_hold": b.d_hold,
                    "d_end": b.d_end,
                    "ramp_time": b.ramp_time,
                },
                "sin_amplitudes": self.sin_amplitudes,
                "cos_amplitudes": self.cos_amplitudes,
                "randomization": self.randomization,
                "d_floor": self.d_floor,
                "seed": self.seed,
            }
        )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ControlPulse":
        try:
            base = data["baseline"]
            baseline = BaselineRamp(
                d_start=float(base["d_start"]),
                d_hold=float(base["d_hold"]),
                d_end=float(base["d_end"]),
                total_time=float(data["total_time"]),
                ramp_time=float(base["ramp_time"]),
            )
            return cls(
                baseline,
                np.asarray(data["sin_amplitudes"], dtype=float),
                np.asarray(data["cos_amplitudes"], dtype=float),
                np.asarray(data["randomization"], dtype=float),
                d_floor=float(data.get("d_floor", DEFAULT_D_FLOOR)),
                seed=data.get("seed"),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid pulse description: {e}") from e

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> "ControlPulse":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read pulse file {path}: {e}") from e
        return cls.from_dict(data)
