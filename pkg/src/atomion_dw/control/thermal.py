"""이온 열적 초기 상태의 Fock 가중치와 열평균 overlap fidelity."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from atomion_dw.control.protocols import ProtocolSetup, evolve_branches, transfer_overlaps
from atomion_dw.control.propagation import Schedule
from atomion_dw.core.errors import DomainError, PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_N_CUT = 4


@dataclass(frozen=True)
class ThermalEnsemble:
    """p_n = (1 - γ) γⁿ, γ = exp(-ω_i / k_B T), n = 0..n_cut (잘린 합 ≤ 1)."""

    temperature: float
    omega_i: float
    n_cut: int = DEFAULT_N_CUT

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise DomainError(f"temperature must be >= 0, got {self.temperature!r}")
        if not self.omega_i > 0:
            raise DomainError(f"omega_i must be > 0, got {self.omega_i!r}")
        if self.n_cut < 0:
            raise DomainError(f"n_cut must be >= 0, got {self.n_cut!r}")

    @property
    def gamma(self) -> float:
        if self.temperature == 0:
            return 0.0
        return math.exp(-self.omega_i / self.temperature)

    @property
    def probabilities(self) -> np.ndarray:
        g = self.gamma
        return (1.0 - g) * g ** np.arange(self.n_cut + 1)

    @property
    def normalized_probabilities(self) -> np.ndarray:
        p = self.probabilities
        return p / p.sum()

    @property
    def truncated_weight(self) -> float:
        """잘려나간 확률 γ^(n_cut+1)."""
        return self.gamma ** (self.n_cut + 1)


def weighted_fidelity(
    overlaps: Mapping[int, float], ensemble: ThermalEnsemble, *, normalized: bool = False
) -> float:
    """F = Σ_n p_n O_n."""
    p = ensemble.normalized_probabilities if normalized else ensemble.probabilities
    missing = [n for n in range(ensemble.n_cut + 1) if n not in overlaps]
    if missing:
        raise PreconditionError(f"missing branch overlaps for ion levels {missing}")
    return float(sum(p[n] * float(overlaps[n]) for n in range(ensemble.n_cut + 1)))


def thermal_fidelity(
    setup: ProtocolSetup,
    schedule: Schedule,
    ensemble: ThermalEnsemble,
    *,
    n_steps: int = 2000,
    threads: Optional[int] = None,
) -> tuple[float, dict[int, float]]:
    """가지 n_i = 0..n_cut 를 각각 전개해 확률 가중합을 냅니다 (밀도행렬 전개 없음)."""
    levels = list(range(ensemble.n_cut + 1))
    trajectories = evolve_branches(
        setup, schedule, levels, n_steps=n_steps, n_samples=2, threads=threads
    )
    overlaps = transfer_overlaps(trajectories, setup)
    f = weighted_fidelity(overlaps, ensemble)
    logger.info(
        "thermal fidelity at T=%.4g: F=%.4f (branch overlaps %s)",
        ensemble.temperature,
        f,
        ", ".join(f"{n}:{o:.3f}" for n, o in overlaps.items()),
    )
    return f, overlaps


def fidelity_curve(
    overlaps: Mapping[int, float],
    temperatures: np.ndarray,
    omega_i: float,
    n_cut: int = DEFAULT_N_CUT,
) -> np.ndarray:
    """같은 가지 overlap 으로 여러 온도의 F(T) 를 계산합니다."""
    return np.array(
        [weighted_fidelity(overlaps, ThermalEnsemble(float(t), omega_i, n_cut)) for t in temperatures]
    )
