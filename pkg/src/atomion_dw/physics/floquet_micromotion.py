"""Paul 트랩 micromotion: secular 파라미터, 결합 행렬 요소, Floquet 블록 해밀토니안.

Cook-Shankland 변환 후 이온 좌표에만 걸리는 항은

    H_mm(t) = V1 cos(2Ωt) + (sin Ωt 항),  V1 = -m_i g² ω_i² z_i²

이고, 반교환자 {z_i, p_i} 는 고유상태 사이에서
⟨l'|{z_i,p_i}|l⟩ = i m_i (E_l' - E_l) ⟨l'|z_i²|l⟩ 로 바꿔 씁니다.
한 주기 시간 평균 후 |Δj| = 2 블록은 V1/2, |Δj| = 1 블록은
∓(g ω_i m_i / 2)(E_l' - E_l) z_i² 입니다 (행 class 가 열보다 1 클 때 음의 부호).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from atomion_dw.core.errors import ConvergenceWarning, DomainError, PreconditionError
from atomion_dw.core.workers import parallel_map
from atomion_dw.physics.tracking import SpectrumSweep
from atomion_dw.physics.twobody_spectrum import ProductBasis, TwoBodyModel

logger = logging.getLogger(__name__)

Q_STABILITY_LIMIT = 0.91
DEFAULT_J_MAX = 2
J_GAP_TOLERANCE = 0.2


@dataclass(frozen=True)
class PaulTrapParams:
    """a, q (무차원)와 구동 각진동수 Ω (E*/ħ 단위)."""

    a: float
    q: float
    drive: float

    def __post_init__(self) -> None:
        if not self.drive > 0:
            raise DomainError(f"drive frequency must be > 0, got {self.drive!r}")
        if self.a < 0:
            raise DomainError(f"a must be >= 0, got {self.a!r}")
        if not 0 <= self.q < Q_STABILITY_LIMIT:
            raise DomainError(
                f"q={self.q!r} outside the stability bound 0 <= q < {Q_STABILITY_LIMIT}"
            )
        if self.q == 0:
            raise DomainError("q = 0: g = [2(1 + 2a/q²)]^-1/2 is undefined")
        if self.a > 0.1 * self.q:
            logger.warning("a=%.3g is not much smaller than q=%.3g", self.a, self.q)

    @classmethod
    def for_secular(cls, omega_i: float, q: float, a: float = 0.0) -> "PaulTrapParams":
        """주어진 secular 진동수를 주는 Ω 로 트랩을 만듭니다."""
        if not q > 0:
            raise DomainError(f"q must be > 0, got {q!r}")
        return cls(a=a, q=q, drive=2.0 * omega_i / math.sqrt(a + 0.5 * q * q))


def secular_params(trap: PaulTrapParams) -> tuple[float, float]:
    """(ω_i, g): ω_i = (Ω/2) sqrt(a + q²/2), g = [2(1 + 2a/q²)]^(-1/2)."""
    omega_i = 0.5 * trap.drive * math.sqrt(trap.a + 0.5 * trap.q**2)
    g = 1.0 / math.sqrt(2.0 * (1.0 + 2.0 * trap.a / trap.q**2))
    return omega_i, g


def secular_frequency_series(trap: PaulTrapParams) -> float:
    """q⁶ 까지의 Mathieu 특성지수 급수로 계산한 secular 진동수."""
    a, q = trap.a, trap.q
    beta_sq = a
    beta_sq += (0.5 + 0.5 * a) * q**2
    beta_sq += (25.0 / 128.0 + 273.0 * a / 512.0) * q**4
    beta_sq += (317.0 / 2304.0 + 59525.0 * a / 82944.0) * q**6
    return 0.5 * trap.drive * math.sqrt(beta_sq)


# --- 고유기저 모멘트 ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EigenMoments:
    """d 에서의 2체 고유상태와 R², r², rR 행렬 (고유기저)."""

    d: float
    energies: np.ndarray
    parity: np.ndarray
    bound_weight: np.ndarray
    com_sq: np.ndarray
    rel_sq: np.ndarray
    com_rel: np.ndarray
    m_i: float
    m_a: float

    @property
    def size(self) -> int:
        return int(self.energies.size)

    @property
    def beta_a(self) -> float:
        return self.m_a / (self.m_a + self.m_i)

    def ion_position_sq(self) -> np.ndarray:
        """z_i² = R² + (m_a/M)² r² + 2 (m_a/M) R r."""
        b = self.beta_a
        return self.com_sq + b * b * self.rel_sq + 2.0 * b * self.com_rel

    def ground_pair(self) -> tuple[int, int]:
        """분자 상태를 제외한 최저 짝/홀 준위 인덱스."""
        trap = self.bound_weight <= 0.5
        even = np.flatnonzero(trap & (self.parity > 0))
        odd = np.flatnonzero(trap & (self.parity < 0))
        if even.size == 0 or odd.size == 0:
            raise PreconditionError(f"no trap ground pair among {self.size} levels")
        return int(even[0]), int(odd[0])


def eigen_moments(model: TwoBodyModel, d: float, n_levels: int = 200) -> EigenMoments:
    energies, vectors, parity = model.diagonalize(d, n_levels)
    b: ProductBasis = model.basis

    def sym(m: np.ndarray) -> np.ndarray:
        return 0.5 * (m + m.T)

    return EigenMoments(
        d=float(d),
        energies=energies,
        parity=parity,
        bound_weight=model.bound_weight(vectors),
        com_sq=sym(b.eigen_moment(vectors, 2, 0)),
        rel_sq=sym(b.eigen_moment(vectors, 0, 2)),
        com_rel=sym(b.eigen_moment(vectors, 1, 1)),
        m_i=model.config.m_i,
        m_a=model.config.m_a,
    )


# --- 결합 행렬 요소 ---------------------------------------------------------


@dataclass(frozen=True)
class CouplingTable:
    """기준 상태 g 와 각 준위 l 사이 |V_2| 성분. detuning = E_g - E_l."""

    detuning: np.ndarray
    v_rr: np.ndarray
    v_rR: np.ndarray
    v_RR: np.ndarray
    omega_a: float
    mass_ratio: float
    ground: int

    def in_trap_units(self) -> "CouplingTable":
        """결합을 ħω_a 단위로."""
        s = 1.0 / self.omega_a
        return CouplingTable(
            detuning=self.detuning,
            v_rr=self.v_rr * s,
            v_rR=self.v_rR * s,
            v_RR=self.v_RR * s,
            omega_a=1.0,
            mass_ratio=self.mass_ratio,
            ground=self.ground,
        )

    def window_max(self, lo: float, hi: float) -> dict[str, float]:
        mask = (np.abs(self.detuning) >= lo) & (np.abs(self.detuning) <= hi)
        if not mask.any():
            return {"v_rr": 0.0, "v_rR": 0.0, "v_RR": 0.0}
        return {
            "v_rr": float(self.v_rr[mask].max()),
            "v_rR": float(self.v_rR[mask].max()),
            "v_RR": float(self.v_RR[mask].max()),
        }


def micromotion_couplings(
    moments: EigenMoments,
    trap: PaulTrapParams,
    omega_a: float,
    ground: Optional[int] = None,
) -> CouplingTable:
    """V_rr, V_rR, V_RR = g m_i ω_i |E_g - E_l| × {(m_a/M)²|r²|, (m_a/M)|rR|, |R²|}."""
    omega_i, g = secular_params(trap)
    gi = moments.ground_pair()[0] if ground is None else int(ground)
    de = moments.energies[gi] - moments.energies
    pref = g * moments.m_i * omega_i * np.abs(de)
    b = moments.beta_a
    return CouplingTable(
        detuning=de,
        v_rr=pref * b * b * np.abs(moments.rel_sq[gi]),
        v_rR=pref * b * np.abs(moments.com_rel[gi]),
        v_RR=pref * np.abs(moments.com_sq[gi]),
        omega_a=float(omega_a),
        mass_ratio=b,
        ground=gi,
    )


@dataclass(frozen=True)
class SelectionRuleReport:
    max_r_violation: float
    max_r_sq_violation: float
    max_r_sq_error: float
    offending: list[tuple[int, int, int]]
    v_RR_tail_ratio: float
    v_rr_tail_ratio: float

    @property
    def passed(self) -> bool:
        return not self.offending and self.v_RR_tail_ratio < 0.01


def com_selection_rule_audit(
    basis: ProductBasis, couplings: Optional[CouplingTable] = None, tol: float = 1e-10
) -> SelectionRuleReport:
    """COM 조화진동자 선택 규칙과 V_RR 의 detuning 감쇠를 점검합니다.

    offending 항목은 (moment 차수, n, n') 입니다.
    """
    r1 = basis.com_moment(1)
    r2 = basis.com_moment(2)
    n = np.arange(basis.n_com)
    gap = np.abs(np.subtract.outer(n, n))
    ell_sq = 1.0 / (basis.config.total_mass * basis.omega_com)

    offending: list[tuple[int, int, int]] = []
    bad1 = (gap != 1) & (np.abs(r1) > tol)
    bad2 = ~np.isin(gap, (0, 2)) & (np.abs(r2) > tol)
    offending += [(1, int(a), int(b)) for a, b in zip(*np.nonzero(bad1))]
    offending += [(2, int(a), int(b)) for a, b in zip(*np.nonzero(bad2))]

    exact = np.zeros_like(r2)
    exact[n, n] = (n + 0.5) * ell_sq
    up = n[:-2]
    exact[up, up + 2] = 0.5 * np.sqrt((up + 1.0) * (up + 2.0)) * ell_sq
    exact[up + 2, up] = exact[up, up + 2]
    err = float(np.abs(r2 - exact).max())
    if err > tol * max(1.0, ell_sq):
        offending.append((2, -1, -1))

    tail_RR = tail_rr = 0.0
    if couplings is not None:
        edge = 3.0 * basis.omega_com
        far = np.abs(couplings.detuning) > edge
        peak_RR = float(couplings.v_RR.max()) or 1.0
        peak_rr = float(couplings.v_rr.max()) or 1.0
        if far.any():
            tail_RR = float(couplings.v_RR[far].max()) / peak_RR
            tail_rr = float(couplings.v_rr[far].max()) / peak_rr
    return SelectionRuleReport(
        max_r_violation=float(np.abs(np.where(gap != 1, r1, 0.0)).max()),
        max_r_sq_violation=float(np.abs(np.where(np.isin(gap, (0, 2)), 0.0, r2)).max()),
        max_r_sq_error=err,
        offending=offending,
        v_RR_tail_ratio=tail_RR,
        v_rr_tail_ratio=tail_rr,
    )


def mass_ratio_report(
    first: CouplingTable,
    second: CouplingTable,
    window_first: tuple[float, float],
    window_second: tuple[float, float],
) -> dict[str, float]:
    """같은 detuning 구간에서 V_rr 비와 (m_a/M)² 비를 나란히 보고합니다."""
    a = first.in_trap_units().window_max(*window_first)["v_rr"]
    b = second.in_trap_units().window_max(*window_second)["v_rr"]
    observed = a / b if b > 0 else float("inf")
    predicted = (first.mass_ratio / second.mass_ratio) ** 2
    return {
        "v_rr_first": a,
        "v_rr_second": b,
        "observed_ratio": observed,
        "mass_scaling_ratio": predicted,
        "within_factor_2": float(0.5 <= observed / predicted <= 2.0),
    }


# --- Floquet ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FloquetBasis:
    """|u_jl⟩ = e^{ijΩt}|ψ_l⟩, j = j_min..j_max. 인덱스 (j - j_min) * n + l."""

    energies: np.ndarray
    ion_position_sq: np.ndarray
    j_max: int = DEFAULT_J_MAX
    j_min: Optional[int] = None

    @property
    def classes(self) -> np.ndarray:
        lo = -self.j_max if self.j_min is None else self.j_min
        return np.arange(lo, self.j_max + 1)

    @property
    def n_levels(self) -> int:
        return int(self.energies.size)

    @property
    def dimension(self) -> int:
        return self.classes.size * self.n_levels

    def floquet_energies(self, drive: float) -> np.ndarray:
        return (self.energies[None, :] + drive * self.classes[:, None]).ravel()

    def class_index(self) -> np.ndarray:
        return np.repeat(self.classes, self.n_levels)

    def shifted(self, k: int) -> "FloquetBasis":
        """모든 class 를 k 만큼 옮긴 기저."""
        lo = int(self.classes[0]) + k
        return FloquetBasis(
            energies=self.energies,
            ion_position_sq=self.ion_position_sq,
            j_max=self.j_max + k,
            j_min=lo,
        )

    @classmethod
    def from_moments(cls, moments: EigenMoments, j_max: int = DEFAULT_J_MAX) -> "FloquetBasis":
        return cls(
            energies=moments.energies,
            ion_position_sq=moments.ion_position_sq(),
            j_max=int(j_max),
        )


def build_floquet_hamiltonian(
    basis: FloquetBasis, trap: PaulTrapParams, m_i: float
) -> np.ndarray:
    """실대칭 Floquet 행렬. |Δj| ∉ {1, 2} 블록은 정확히 0."""
    classes = basis.classes
    if classes.size < 5:
        raise PreconditionError(
            f"need at least 5 Floquet classes (j_max >= 2), got {classes.size}"
        )
    omega_i, g = secular_params(trap)
    n = basis.n_levels
    x = 0.5 * (basis.ion_position_sq + basis.ion_position_sq.T)
    de = np.subtract.outer(basis.energies, basis.energies)  # E_row - E_col
    v1_half = -0.5 * m_i * g * g * omega_i**2 * x
    v2_half = -0.5 * g * omega_i * m_i * de * x

    h = np.zeros((basis.dimension, basis.dimension))
    for a, ja in enumerate(classes):
        rows = slice(a * n, (a + 1) * n)
        h[rows, rows] = np.diag(basis.energies + ja * trap.drive)
        for b, jb in enumerate(classes):
            step = int(ja - jb)
            cols = slice(b * n, (b + 1) * n)
            if abs(step) == 2:
                h[rows, cols] = v1_half
            elif step == 1:
                h[rows, cols] = v2_half
            elif step == -1:
                h[rows, cols] = -v2_half
    return h


def brillouin_reduce(energies: np.ndarray, drive: float) -> np.ndarray:
    """[-Ω/2, Ω/2) 로 접기."""
    e = np.asarray(energies, dtype=float)
    return np.mod(e + 0.5 * drive, drive) - 0.5 * drive


def resonance_gap(
    values: np.ndarray, vectors: np.ndarray, target: int
) -> tuple[float, float, int, int]:
    """target 성분이 가장 큰 두 Floquet 상태로 2준위 간격을 추정합니다.

    gap = |ε1 - ε2| · 2 sqrt(w1 w2) / (w1 + w2). 반환 (ε1, gap, k1, k2).
    """
    weights = vectors[target] ** 2
    order = np.argsort(weights)[::-1]
    k1, k2 = int(order[0]), int(order[1])
    w1, w2 = float(weights[k1]), float(weights[k2])
    split = abs(float(values[k1] - values[k2]))
    gap = split * 2.0 * math.sqrt(w1 * w2) / max(w1 + w2, 1e-300)
    return float(values[k1]), gap, k1, k2


@dataclass(eq=False)
class FloquetSweep(SpectrumSweep):
    """창 안의 Floquet 준위들과 바닥 쌍의 dressed 에너지 / 공명 간격."""

    reduced: Optional[np.ndarray] = None
    j_class: Optional[np.ndarray] = None
    pair_energies: Optional[np.ndarray] = None
    pair_gaps: Optional[np.ndarray] = None
    drive: float = 0.0
    j_max: int = DEFAULT_J_MAX
    extra: dict[str, float] = field(default_factory=dict)


def _floquet_at(
    moments: EigenMoments, trap: PaulTrapParams, j_max: int, n_window: int
) -> dict[str, np.ndarray]:
    basis = FloquetBasis.from_moments(moments, j_max)
    h = build_floquet_hamiltonian(basis, trap, moments.m_i)
    values, vectors = linalg.eigh(h)
    g_idx, e_idx = moments.ground_pair()
    zero = int(np.flatnonzero(basis.classes == 0)[0]) * basis.n_levels
    pair_e, pair_gap = [], []
    for idx in (g_idx, e_idx):
        eps, gap, _, _ = resonance_gap(values, vectors, zero + idx)
        pair_e.append(eps)
        pair_gap.append(gap)
    centre = moments.energies[g_idx]
    near = np.sort(np.argsort(np.abs(values - centre), kind="stable")[:n_window])
    dominant = np.argmax(
        (vectors[:, near] ** 2).reshape(basis.classes.size, basis.n_levels, -1).sum(axis=1),
        axis=0,
    )
    return {
        "energies": values[near],
        "classes": basis.classes[dominant],
        "pair_energies": np.array(pair_e),
        "pair_gaps": np.array(pair_gap),
    }


def floquet_sweep(
    model: TwoBodyModel,
    d_list: Sequence[float],
    trap: PaulTrapParams,
    j_max: int = DEFAULT_J_MAX,
    *,
    n_levels: int = 200,
    n_window: int = 40,
    check_j_convergence: bool = True,
    threads: Optional[int] = None,
) -> FloquetSweep:
    """d 마다 Floquet 행렬을 대각화하고 바닥 쌍 근처 준위를 모읍니다."""
    if int(j_max) < 2:
        raise PreconditionError(f"j_max must be >= 2, got {j_max!r}")
    omega_i, _ = secular_params(trap)
    if not math.isclose(omega_i, model.config.omega_i, rel_tol=1e-6):
        raise PreconditionError(
            f"trap secular frequency {omega_i:.6g} differs from the model's "
            f"omega_i {model.config.omega_i:.6g}"
        )
    ds = sorted((float(d) for d in d_list), reverse=True)
    if not ds:
        raise DomainError("empty d list")

    def one(d: float) -> tuple[EigenMoments, dict[str, np.ndarray]]:
        mom = eigen_moments(model, d, n_levels)
        return mom, _floquet_at(mom, trap, int(j_max), n_window)

    results = parallel_map(one, ds, threads)
    width = min(r[1]["energies"].size for r in results)
    energies = np.array([r[1]["energies"][:width] for r in results])
    sweep = FloquetSweep(
        d_values=np.array(ds),
        energies=energies,
        vectors=None,
        order=np.tile(np.arange(width), (len(ds), 1)),
        labels=[f"window{k}" for k in range(width)],
        metadata={
            "model": "floquet",
            "j_max": int(j_max),
            "n_levels": int(n_levels),
            "floquet_dimension": (2 * int(j_max) + 1) * int(n_levels),
            "a": trap.a,
            "q": trap.q,
        },
        reduced=brillouin_reduce(energies, trap.drive),
        j_class=np.array([r[1]["classes"][:width] for r in results]),
        pair_energies=np.array([r[1]["pair_energies"] for r in results]),
        pair_gaps=np.array([r[1]["pair_gaps"] for r in results]),
        drive=trap.drive,
        j_max=int(j_max),
    )

    if check_j_convergence:
        mom = results[0][0]
        more = _floquet_at(mom, trap, int(j_max) + 1, n_window)
        base = sweep.pair_gaps[0]
        change = np.abs(more["pair_gaps"] - base) / np.maximum(np.abs(base), 1e-9 * trap.drive)
        shift = float(np.abs(more["pair_energies"] - sweep.pair_energies[0]).max())
        sweep.extra["j_gap_change"] = float(change.max())
        sweep.extra["j_energy_shift"] = shift
        if float(change.max()) > J_GAP_TOLERANCE:
            warnings.warn(
                f"Floquet classes not converged at d={ds[0]:.4g}: ground-pair gap "
                f"changes by {change.max():.1%} from j_max={j_max} to {int(j_max) + 1}",
                ConvergenceWarning,
                stacklevel=2,
            )
    logger.info(
        "Floquet sweep: %d d-values, dimension %d, max pair gap %.3g",
        len(ds),
        sweep.metadata["floquet_dimension"],
        float(sweep.pair_gaps.max()),
    )
    return sweep
