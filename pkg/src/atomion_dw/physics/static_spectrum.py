"""이온이 고정된 경우의 이중 우물 스펙트럼 (1D, 3D m = 0)."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from atomion_dw.core.cache import ArrayCache
from atomion_dw.core.errors import ConvergenceWarning, DomainError, PreconditionError
from atomion_dw.core.workers import parallel_map
from atomion_dw.physics.qdt_numerov import (
    DEFAULT_N_BOUND_KEEP,
    DEFAULT_PPW,
    RadialBasis,
    merge_partial_waves,
    solve_radial_3d_set,
)
from atomion_dw.physics.tracking import (
    DEFAULT_OVERLAP_FLOOR,
    SpectrumSweep,
    build_sweep,
    tunnelling_rate,
)

logger = logging.getLogger(__name__)

__all__ = [
    "DoubleWellConfig",
    "StaticModel",
    "StaticModel3D",
    "basis_drift",
    "block_eigh",
    "build_static_hamiltonian",
    "clebsch_coeff",
    "ground_pair_tracks",
    "static_spectrum_3d",
    "static_spectrum_sweep",
    "tunnelling_rate",
]


@dataclass(frozen=True)
class DoubleWellConfig:
    """V_dw(z) = b/d⁴ (z² - d²)², b = m_a ω_a² d²/8."""

    d: float
    omega_a: float
    m_a: float

    def __post_init__(self) -> None:
        if not self.d > 0:
            raise DomainError(f"half-separation d must be > 0, got {self.d!r}")
        if not self.omega_a > 0 or not self.m_a > 0:
            raise DomainError("omega_a and m_a must be > 0")

    @property
    def barrier(self) -> float:
        return self.m_a * self.omega_a**2 * self.d**2 / 8.0

    def potential(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.barrier / self.d**4 * (z**2 - self.d**2) ** 2

    def curvature(self, z: float, h: float = 1e-4) -> float:
        zs = np.array([z - h, z, z + h])
        v = self.potential(zs)
        return float((v[0] - 2.0 * v[1] + v[2]) / h**2)


def _check_d(d: float) -> float:
    v = float(d)
    if not v > 0:
        raise DomainError(f"half-separation d must be > 0, got {d!r}")
    return v


def build_static_hamiltonian(
    basis: RadialBasis, d: float, omega_a: Optional[float] = None
) -> np.ndarray:
    """H_kk' = (E_k + m ω² d²/8) δ_kk' + (m ω²/4)(M4/(2d²) - 3 M2)."""
    d = _check_d(d)
    if basis.kind != "1d":
        raise PreconditionError("static 1D Hamiltonian needs a 1D basis")
    omega = basis.omega
    if omega_a is not None and not math.isclose(omega_a, omega, rel_tol=1e-12):
        raise PreconditionError(
            f"basis was solved with omega={omega!r}, not omega_a={omega_a!r}"
        )
    m = 0.5 * basis.mass_factor**2
    pref = m * omega**2
    h = (pref / 4.0) * (basis.moment(4) / (2.0 * d * d) - 3.0 * basis.moment(2))
    h[np.diag_indices_from(h)] += basis.energies + pref * d * d / 8.0
    return h


def block_eigh(
    h: np.ndarray, blocks: Sequence[np.ndarray], labels: Sequence[int], n_levels: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = h.shape[0]
    energies, vectors, parity = [], [], []
    for block, label in zip(blocks, labels):
        if block.size == 0:
            continue
        sub = h[np.ix_(block, block)]
        keep = min(n_levels, block.size)
        vals, vecs = linalg.eigh(sub, subset_by_index=[0, keep - 1])
        full = np.zeros((n, keep))
        full[block] = vecs[:, :keep]
        energies.append(vals[:keep])
        vectors.append(full)
        parity.append(np.full(keep, label, dtype=int))
    e = np.concatenate(energies)
    order = np.argsort(e, kind="stable")[:n_levels]
    return e[order], np.hstack(vectors)[:, order], np.concatenate(parity)[order]


def _pair_labels(parity: np.ndarray, bound_weight: np.ndarray) -> list[str]:
    """큰 d 에서 준위 이름: 트랩 쌍 '|k>±', 분자 상태 'mol j'."""
    labels = []
    seen = {1: 0, -1: 0}
    n_mol = 0
    for p, w in zip(parity, bound_weight):
        if w > 0.5:
            labels.append(f"mol{n_mol}")
            n_mol += 1
            continue
        sign = "+" if p > 0 else "-"
        labels.append(f"|{seen[int(p)]}>{sign}")
        seen[int(p)] += 1
    return labels


def ground_pair_tracks(sweep: SpectrumSweep) -> tuple[int, int]:
    return sweep.track_of_label("|0>+"), sweep.track_of_label("|0>-")


class StaticModel:
    """1D 고정 이온 모형. 모멘트는 한 번만 계산하고 d 마다 조립합니다."""

    def __init__(self, basis: RadialBasis, omega_a: Optional[float] = None) -> None:
        if basis.kind != "1d":
            raise PreconditionError("StaticModel needs a merged 1D basis")
        if omega_a is not None and not math.isclose(omega_a, basis.omega, rel_tol=1e-12):
            raise PreconditionError("omega_a differs from the basis trap frequency")
        self.basis = basis
        self.omega_a = basis.omega
        self.m_a = 0.5 * basis.mass_factor**2
        basis.moment(2)
        basis.moment(4)
        self._blocks = [np.flatnonzero(basis.parity == p) for p in (1, -1)]
        w = basis.grid.weights
        self._half_overlap = (basis.wavefunctions * w[None, :]) @ basis.wavefunctions.T

    def config(self, d: float) -> DoubleWellConfig:
        return DoubleWellConfig(d=d, omega_a=self.omega_a, m_a=self.m_a)

    def hamiltonian(self, d: float) -> np.ndarray:
        return build_static_hamiltonian(self.basis, d)

    def parametric_parts(self) -> tuple[np.ndarray, np.ndarray, float]:
        pref = self.m_a * self.omega_a**2
        fixed = -0.75 * pref * self.basis.moment(2)
        fixed[np.diag_indices_from(fixed)] += self.basis.energies
        return fixed, self.basis.moment(4), pref

    def diagonalize(
        self, d: float, n_levels: Optional[int] = None
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.basis.size if n_levels is None else int(n_levels)
        return block_eigh(self.hamiltonian(d), self._blocks, (1, -1), n)

    def bound_weight(self, vectors: np.ndarray) -> np.ndarray:
        mask = self.basis.energies < 0.0
        return np.sum(vectors[mask] ** 2, axis=0)

    def right_probability(self, vector: np.ndarray) -> float:
        """z > 0 쪽 확률 (반직선 overlap 으로 정확히 계산)."""
        return float(0.5 * vector @ self._half_overlap @ vector)

    def position_matrix(self) -> np.ndarray:
        return self.basis.moment(1)

    def localized_pair(
        self, v_g: np.ndarray, v_e: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """(Φ_g ± Φ_e)/√2 중 왼쪽/오른쪽에 몰린 조합 (L, R)."""
        s = 1.0 if float(v_g @ self.position_matrix() @ v_e) >= 0.0 else -1.0
        right = (v_g + s * v_e) / math.sqrt(2.0)
        left = (v_g - s * v_e) / math.sqrt(2.0)
        return left, right


def basis_drift(
    model: StaticModel, d: float, n_check: int = 4, fraction: float = 0.8
) -> float:
    """기저를 fraction 만큼 줄였을 때 최저 n_check 준위의 최대 변화."""
    n_keep = max(2, int(round(model.basis.size * fraction)))
    keep = np.argsort(model.basis.energies, kind="stable")[:n_keep]
    small = StaticModel(model.basis.subset(np.sort(keep)))
    e_full = model.diagonalize(d, n_check)[0]
    e_small = small.diagonalize(d, n_check)[0]
    return float(np.max(np.abs(e_full - e_small)))


def static_spectrum_sweep(
    model: StaticModel,
    d_list: Sequence[float],
    *,
    n_levels: int = 40,
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR,
    drift_tol: Optional[float] = None,
    threads: Optional[int] = None,
) -> SpectrumSweep:
    """d 마다 전체 대각화 후 가장 큰 d 에서부터 준위를 추적합니다."""
    ds = [_check_d(d) for d in d_list]
    if not ds:
        raise DomainError("empty d list")
    results = parallel_map(lambda d: model.diagonalize(d, n_levels), ds, threads)
    sweep = build_sweep(
        ds,
        np.array([r[0] for r in results]),
        np.array([r[1] for r in results]),
        parity=np.array([r[2] for r in results]),
        overlap_floor=overlap_floor,
        metadata={
            "model": "static-1d",
            "omega_a": model.omega_a,
            "m_a": model.m_a,
            "basis_size": model.basis.size,
            "n_bound": model.basis.n_bound,
        },
    )
    sweep.labels = _pair_labels(
        sweep.parity[0], model.bound_weight(sweep.vectors[0])
    )

    tol = 1e-3 * model.omega_a if drift_tol is None else float(drift_tol)
    drift = basis_drift(model, float(sweep.d_values[-1]))
    sweep.metadata["basis_drift"] = drift
    if drift > tol:
        warnings.warn(
            f"static basis not converged at d={sweep.d_values[-1]:.4g}: "
            f"drift {drift:.3e} > {tol:.3e}",
            ConvergenceWarning,
            stacklevel=2,
        )
    logger.info(
        "static sweep: %d d-values, %d levels, %d annotations",
        sweep.n_d,
        sweep.n_tracks,
        len(sweep.annotations),
    )
    return sweep


# --- 3D ---------------------------------------------------------------------


def clebsch_coeff(l: int, l_prime: int, j: int) -> float:
    """C^(j)_{l,l'} = 2π ∫ sinθ cos^j θ Y_{l'0} Y_{l0} dθ (j = 2, 4)."""
    if j not in (2, 4):
        raise DomainError(f"angular factor only tabulated for j in (2, 4), got {j!r}")
    if l < 0 or l_prime < 0:
        raise DomainError(f"l must be >= 0, got ({l!r}, {l_prime!r})")
    lo, hi = min(l, l_prime), max(l, l_prime)
    gap = hi - lo
    x = float(lo)
    if j == 2:
        if gap == 0:
            return (2.0 * x * (x + 1.0) - 1.0) / (4.0 * x * (x + 1.0) - 3.0)
        if gap == 2:
            return (
                (x + 1.0)
                * (x + 2.0)
                * math.sqrt(5.0 + 4.0 * x * (x + 3.0))
                / ((2.0 * x + 1.0) * (2.0 * x + 3.0) * (2.0 * x + 5.0))
            )
        return 0.0
    if gap == 0:
        return (
            3.0
            * (3.0 + 2.0 * x * (x + 1.0) * (x * x + x - 4.0))
            / ((2.0 * x - 3.0) * (2.0 * x - 1.0) * (2.0 * x + 3.0) * (2.0 * x + 5.0))
        )
    if gap == 2:
        return (
            2.0
            * (x + 1.0)
            * (x + 2.0)
            * (-3.0 + 2.0 * x * (x + 3.0))
            * math.sqrt(5.0 + 4.0 * x * (x + 3.0))
            / (
                (2.0 * x - 1.0)
                * (2.0 * x + 1.0)
                * (2.0 * x + 3.0)
                * (2.0 * x + 5.0)
                * (2.0 * x + 7.0)
            )
        )
    if gap == 4:
        return (
            (x + 1.0)
            * (x + 2.0)
            * (x + 3.0)
            * (x + 4.0)
            * math.sqrt(9.0 + 4.0 * x * (x + 5.0))
            / (
                (2.0 * x + 1.0)
                * (2.0 * x + 3.0)
                * (2.0 * x + 5.0)
                * (2.0 * x + 7.0)
                * (2.0 * x + 9.0)
            )
        )
    return 0.0


def angular_factor_matrix(l_values: np.ndarray, j: int) -> np.ndarray:
    ls = np.asarray(l_values, dtype=int)
    l_max = int(ls.max())
    table = np.array(
        [[clebsch_coeff(a, b, j) for b in range(l_max + 1)] for a in range(l_max + 1)]
    )
    return table[np.ix_(ls, ls)]


class StaticModel3D:
    """3D 고정 이온 모형 (m = 0). 기저는 등방 ω_⊥ 조화 트랩 + C4."""

    def __init__(self, basis: RadialBasis, omega_a: float) -> None:
        if basis.kind != "3d":
            raise PreconditionError("StaticModel3D needs merged partial waves")
        if not omega_a > 0:
            raise DomainError(f"omega_a must be > 0, got {omega_a!r}")
        self.basis = basis
        self.omega_a = float(omega_a)
        self.omega_perp = basis.omega
        self.m_a = 0.5 * basis.mass_factor**2
        self.z2 = basis.moment(2) * angular_factor_matrix(basis.l, 2)
        self.z4 = basis.moment(4) * angular_factor_matrix(basis.l, 4)
        self._blocks = [np.flatnonzero(basis.parity == p) for p in (1, -1)]

    def hamiltonian(self, d: float) -> np.ndarray:
        d = _check_d(d)
        m, wa, wp = self.m_a, self.omega_a, self.omega_perp
        h = (m * wa**2 / 4.0) * (self.z4 / (2.0 * d * d) - self.z2)
        h -= 0.5 * m * wp**2 * self.z2
        h[np.diag_indices_from(h)] += self.basis.energies + m * wa**2 * d * d / 8.0
        return h

    def diagonalize(
        self, d: float, n_levels: Optional[int] = None
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.basis.size if n_levels is None else int(n_levels)
        return block_eigh(self.hamiltonian(d), self._blocks, (1, -1), n)

    def bound_weight(self, vectors: np.ndarray) -> np.ndarray:
        mask = self.basis.energies < 0.0
        return np.sum(vectors[mask] ** 2, axis=0)

    def top_l_population(self, vectors: np.ndarray) -> np.ndarray:
        mask = self.basis.l == int(self.basis.l.max())
        return np.sum(vectors[mask] ** 2, axis=0)


def static_spectrum_3d(
    phi: float,
    omega_a: float,
    omega_perp: float,
    d_list: Sequence[float],
    l_max: int,
    n_max: int,
    mass_factor: float,
    *,
    interacting: bool = True,
    n_bound_keep: int = DEFAULT_N_BOUND_KEEP,
    points_per_wavelength: float = DEFAULT_PPW,
    n_levels: int = 40,
    n_check: int = 10,
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR,
    cache: Optional[ArrayCache] = None,
    threads: Optional[int] = None,
) -> SpectrumSweep:
    """부분파 l = 0..l_max, 각 n_max 개 반지름 상태로 3D 스펙트럼을 구합니다."""
    if l_max < 0 or n_max < 1:
        raise DomainError(f"need l_max >= 0 and n_max >= 1, got {l_max!r}, {n_max!r}")
    blocks = solve_radial_3d_set(
        phi,
        range(int(l_max) + 1),
        mass_factor,
        omega_perp,
        n_states=int(n_max),
        interacting=interacting,
        n_bound_keep=n_bound_keep,
        points_per_wavelength=points_per_wavelength,
        cache=cache,
        threads=threads,
    )
    model = StaticModel3D(merge_partial_waves(blocks), omega_a)
    ds = [_check_d(d) for d in d_list]
    results = parallel_map(lambda d: model.diagonalize(d, n_levels), ds, threads)
    sweep = build_sweep(
        ds,
        np.array([r[0] for r in results]),
        np.array([r[1] for r in results]),
        parity=np.array([r[2] for r in results]),
        overlap_floor=overlap_floor,
        metadata={
            "model": "static-3d",
            "phi": float(phi),
            "omega_a": float(omega_a),
            "omega_perp": float(omega_perp),
            "l_max": int(l_max),
            "n_max": int(n_max),
            "basis_size": model.basis.size,
        },
    )
    sweep.labels = _pair_labels(sweep.parity[0], model.bound_weight(sweep.vectors[0]))

    top = float(model.top_l_population(sweep.vectors[-1][:, :n_check]).max())
    sweep.metadata["top_l_population"] = top
    if top > 1e-4:
        warnings.warn(
            f"l_max={l_max} too small: top partial wave holds {top:.2e} "
            f"of the lowest {n_check} states",
            ConvergenceWarning,
            stacklevel=2,
        )
    logger.info(
        "3D sweep: l<=%d, %d basis states, %d d-values", l_max, model.basis.size, sweep.n_d
    )
    return sweep
