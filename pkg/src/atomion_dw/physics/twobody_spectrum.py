"""이온도 움직이는 1D 2체 문제: 질량중심(R) / 상대좌표(r) 곱 기저.

z_i = R + (m_a/M) r, z_a = R - (m_i/M) r 로 쓰면 조화 트랩 부분은

    ½ M ω_R² R² + ½ μ ω_r² r² + μ (ω_i² - ω_a²) R r

가 되고, 이중 우물의 나머지 V_dw(z_a) - ½ m_a ω_a² z_a² 는 (R, r) 의 4차
다항식입니다. 따라서 모든 d 의존성은 미리 계산한 모멘트 행렬의 계수로만
들어갑니다.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

from atomion_dw.core.cache import ArrayCache
from atomion_dw.core.errors import (
    BasisSupportWarning,
    ConvergenceWarning,
    DomainError,
    PreconditionError,
)
from atomion_dw.core.workers import parallel_map
from atomion_dw.physics.harmonic import (
    ho_energies,
    ho_length,
    ho_position_moments,
    ho_wavefunctions,
)
from atomion_dw.physics.qdt_numerov import (
    DEFAULT_N_BOUND_KEEP,
    DEFAULT_PPW,
    RadialBasis,
    ShortRangePhases,
    merge_parities,
    solve_1d,
)
from atomion_dw.physics.species_units import SpeciesPair
from atomion_dw.physics.static_spectrum import block_eigh
from atomion_dw.physics.tracking import (
    DEFAULT_OVERLAP_FLOOR,
    SpectrumSweep,
    TunnellingTable,
    build_sweep,
    tunnelling_rate,
)

logger = logging.getLogger(__name__)

LABEL_MARGIN = 0.05
UNLABELED = "unlabeled"


def com_rel_frequencies(
    omega_a: float, omega_i: float, pair: SpeciesPair
) -> tuple[float, float]:
    """(ω_R, ω_r). ω_R² = (m_i ω_i² + m_a ω_a²)/M, ω_r² = (m_i ω_a² + m_a ω_i²)/M."""
    return _com_rel(omega_a, omega_i, pair.atom_mass_u, pair.ion_mass_u)


def _com_rel(
    omega_a: float, omega_i: float, m_a: float, m_i: float
) -> tuple[float, float]:
    if omega_a < 0 or not omega_i > 0:
        raise DomainError(
            f"need omega_a >= 0 and omega_i > 0, got {omega_a!r}, {omega_i!r}"
        )
    total = m_a + m_i
    w_com = math.sqrt((m_i * omega_i**2 + m_a * omega_a**2) / total)
    w_rel = math.sqrt((m_i * omega_a**2 + m_a * omega_i**2) / total)
    return w_com, w_rel


@dataclass(frozen=True)
class TwoBodyConfig:
    """무차원 질량(μ = 1/2 단위)과 트랩, 기저 크기."""

    m_a: float
    m_i: float
    omega_a: float
    omega_i: float
    phases: ShortRangePhases
    n_com: int = 40
    n_rel: int = 30
    interacting: bool = True
    n_bound_keep: int = DEFAULT_N_BOUND_KEEP
    points_per_wavelength: float = DEFAULT_PPW

    def __post_init__(self) -> None:
        if not self.m_a > 0 or not self.m_i > 0:
            raise DomainError("masses must be > 0")
        if not self.omega_a > 0:
            raise DomainError(f"omega_a must be > 0, got {self.omega_a!r}")
        if self.n_com < 1 or self.n_rel < 2:
            raise DomainError(
                f"need n_com >= 1 and n_rel >= 2, got {self.n_com}, {self.n_rel}"
            )
        _com_rel(self.omega_a, self.omega_i, self.m_a, self.m_i)

    @classmethod
    def from_pair(
        cls,
        pair: SpeciesPair,
        omega_a: float,
        omega_i: float,
        phases: ShortRangePhases,
        **kwargs: object,
    ) -> "TwoBodyConfig":
        mu = pair.reduced_mass_u
        return cls(
            m_a=0.5 * pair.atom_mass_u / mu,
            m_i=0.5 * pair.ion_mass_u / mu,
            omega_a=omega_a,
            omega_i=omega_i,
            phases=phases,
            **kwargs,  # type: ignore[arg-type]
        )

    @property
    def total_mass(self) -> float:
        return self.m_a + self.m_i

    @property
    def reduced_mass(self) -> float:
        return self.m_a * self.m_i / self.total_mass

    @property
    def frequencies(self) -> tuple[float, float]:
        return _com_rel(self.omega_a, self.omega_i, self.m_a, self.m_i)


def apply_kron(a: np.ndarray, b: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """(A ⊗ B) V 를 kron 행렬 없이 계산합니다. V 모양 (n_a n_b, m)."""
    n_a, n_b = a.shape[1], b.shape[1]
    v = vectors.reshape(n_a, n_b, -1)
    out = np.einsum("ab,bcm,dc->adm", a, v, b, optimize=True)
    return out.reshape(a.shape[0] * b.shape[0], -1)


@dataclass(eq=False)
class ProductBasis:
    """|f_n(R)⟩ ⊗ |Φ_k(r)⟩. 인덱스는 n * n_rel + k."""

    config: TwoBodyConfig
    com_energies: np.ndarray
    com_moments: dict[int, np.ndarray]
    rel: RadialBasis
    _products: dict[tuple[int, int], np.ndarray] = field(
        default_factory=dict, repr=False
    )

    @property
    def n_com(self) -> int:
        return int(self.com_energies.size)

    @property
    def n_rel(self) -> int:
        return self.rel.size

    @property
    def size(self) -> int:
        return self.n_com * self.n_rel

    @property
    def omega_com(self) -> float:
        return self.config.frequencies[0]

    @property
    def omega_rel(self) -> float:
        return self.config.frequencies[1]

    @property
    def beta_i(self) -> float:
        """m_i/M: z_a = R - β_i r."""
        return self.config.m_i / self.config.total_mass

    @property
    def beta_a(self) -> float:
        """m_a/M: z_i = R + β_a r."""
        return self.config.m_a / self.config.total_mass

    @property
    def energies(self) -> np.ndarray:
        return np.add.outer(self.com_energies, self.rel.energies).ravel()

    @property
    def parity(self) -> np.ndarray:
        com = (-1) ** np.arange(self.n_com)
        return np.outer(com, self.rel.parity).ravel().astype(int)

    @property
    def rel_bound_mask(self) -> np.ndarray:
        return np.tile(self.rel.energies < 0.0, self.n_com)

    def com_moment(self, p: int) -> np.ndarray:
        if p not in self.com_moments:
            raise PreconditionError(f"COM moment R^{p} not cached")
        return self.com_moments[p]

    def rel_moment(self, q: int) -> np.ndarray:
        return self.rel.moment(q)

    def product_moment(self, p: int, q: int) -> np.ndarray:
        """R^p ⊗ r^q (p + q ≤ 4), 한 번만 만듭니다."""
        if p < 0 or q < 0 or p + q > 4:
            raise PreconditionError(f"product moment R^{p} r^{q} not available")
        key = (p, q)
        if key not in self._products:
            self._products[key] = np.kron(self.com_moment(p), self.rel_moment(q))
        return self._products[key]

    def atom_moment(self, j: int) -> np.ndarray:
        """z_a^j = Σ C(j,p) (-β_i)^p R^{j-p} r^p."""
        beta = self.beta_i
        out = np.zeros((self.size, self.size))
        for p in range(j + 1):
            out += comb(j, p) * (-beta) ** p * self.product_moment(j - p, p)
        return out

    def eigen_moment(self, vectors: np.ndarray, p: int, q: int) -> np.ndarray:
        """Vᵀ (R^p ⊗ r^q) V, 큰 kron 행렬을 만들지 않습니다."""
        moved = apply_kron(self.com_moment(p), self.rel_moment(q), vectors)
        return vectors.T @ moved

    def subset(self, n_com: int, n_rel: int) -> "ProductBasis":
        """COM 최저 n_com 개, 상대좌표 에너지 최저 n_rel 개로 줄인 기저."""
        n_com = min(int(n_com), self.n_com)
        keep = np.sort(np.argsort(self.rel.energies, kind="stable")[: int(n_rel)])
        return ProductBasis(
            config=self.config,
            com_energies=self.com_energies[:n_com],
            com_moments={p: m[:n_com, :n_com] for p, m in self.com_moments.items()},
            rel=self.rel.subset(keep),
        )


def build_product_basis(
    config: TwoBodyConfig,
    *,
    cache: Optional[ArrayCache] = None,
    threads: Optional[int] = None,
) -> ProductBasis:
    w_com, w_rel = config.frequencies
    per_parity = config.n_rel // 2 + config.n_bound_keep + 2
    even, odd = solve_1d(
        config.phases,
        1.0,
        w_rel,
        n_states=per_parity,
        interacting=config.interacting,
        n_bound_keep=config.n_bound_keep,
        points_per_wavelength=config.points_per_wavelength,
        cache=cache,
        threads=threads,
    )
    merged = merge_parities(even, odd)
    rel = merged.subset(np.arange(min(config.n_rel, merged.size)), label="relative")
    for q in range(5):
        rel.moment(q)
    basis = ProductBasis(
        config=config,
        com_energies=ho_energies(config.n_com, w_com),
        com_moments=ho_position_moments(config.n_com, config.total_mass, w_com, 4),
        rel=rel,
    )
    logger.info(
        "product basis: %d COM x %d relative = %d states (ω_R=%.4g, ω_r=%.4g, %d bound)",
        basis.n_com,
        basis.n_rel,
        basis.size,
        w_com,
        w_rel,
        rel.n_bound,
    )
    return basis


def build_two_body_hamiltonian(basis: ProductBasis, d: float) -> np.ndarray:
    return TwoBodyModel(basis).hamiltonian(d)


@dataclass(frozen=True)
class ReferenceState:
    """분리된 계의 곱 상태 |n_i⟩_ion ⊗ |n_a, side⟩_atom 의 기저 투영."""

    n_i: int
    n_a: int
    side: int
    coefficients: np.ndarray
    captured: float


class TwoBodyModel:
    """H(d) = H_fixed + (m_a ω_a² d²/8) I + (m_a ω_a²/(8 d²)) Z4."""

    def __init__(self, basis: ProductBasis) -> None:
        cfg = basis.config
        self.basis = basis
        self.config = cfg
        m_a, w_a = cfg.m_a, cfg.omega_a
        beta = basis.beta_i
        rr = basis.product_moment(1, 1)
        z2 = basis.product_moment(2, 0) - 2.0 * beta * rr + beta**2 * basis.product_moment(0, 2)
        fixed = -0.75 * m_a * w_a**2 * z2
        fixed += cfg.reduced_mass * (cfg.omega_i**2 - w_a**2) * rr
        fixed[np.diag_indices_from(fixed)] += basis.energies
        self._fixed = 0.5 * (fixed + fixed.T)
        z4 = basis.atom_moment(4)
        self._z4 = 0.5 * (z4 + z4.T)
        # dense products are only needed for assembly
        basis._products.clear()
        par = basis.parity
        self._blocks = [np.flatnonzero(par == p) for p in (1, -1)]

    def parametric_parts(self) -> tuple[np.ndarray, np.ndarray, float]:
        """(H_fixed, Z4, m_a ω_a²): H(d) = H_fixed + pref (d²/8 I + Z4/(8d²))."""
        return self._fixed, self._z4, self.config.m_a * self.config.omega_a**2

    def hamiltonian(self, d: float) -> np.ndarray:
        d = float(d)
        if not d > 0:
            raise DomainError(f"half-separation d must be > 0, got {d!r}")
        pref = self.config.m_a * self.config.omega_a**2
        h = self._fixed + (pref / (8.0 * d * d)) * self._z4
        h[np.diag_indices_from(h)] += pref * d * d / 8.0
        return h

    def diagonalize(
        self, d: float, n_levels: Optional[int] = None
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.basis.size if n_levels is None else int(n_levels)
        return block_eigh(self.hamiltonian(d), self._blocks, (1, -1), n)

    def bound_weight(self, vectors: np.ndarray) -> np.ndarray:
        return np.sum(vectors[self.basis.rel_bound_mask] ** 2, axis=0)

    def atom_position(self, vectors: np.ndarray) -> np.ndarray:
        """Vᵀ z_a V."""
        b = self.basis
        return b.eigen_moment(vectors, 1, 0) - b.beta_i * b.eigen_moment(vectors, 0, 1)

    # --- 분리된 계의 기준 상태 ---

    def reference_states(
        self, d: float, n_i_max: int = 2, n_a_max: int = 0, n_r_points: int = 0
    ) -> list[ReferenceState]:
        """이온 Fock ⊗ 왼쪽/오른쪽 우물 조화 상태를 곱 기저에 투영합니다.

        상대좌표 적분은 반직선 격자(짝/홀 결합)에서, R 적분은 균일 격자에서
        수행합니다.
        """
        b = self.basis
        cfg = self.config
        m_tot = cfg.total_mass
        l_com = ho_length(m_tot, b.omega_com)
        r_span = l_com * (math.sqrt(2.0 * b.n_com + 1.0) + 6.0)
        n_grid = n_r_points or max(256, 8 * b.n_com + 128)
        r_com = np.linspace(-r_span, r_span, n_grid)
        w_com = np.full(n_grid, r_com[1] - r_com[0])
        f_com = ho_wavefunctions(b.n_com, m_tot, b.omega_com, r_com) * w_com[None, :]

        x = b.rel.grid.x
        psi_w = b.rel.wavefunctions * b.rel.grid.weights[None, :]
        par = b.rel.parity.astype(float)

        states: list[ReferenceState] = []
        for n_i in range(int(n_i_max) + 1):
            for n_a in range(int(n_a_max) + 1):
                for side in (-1, 1):
                    proj = {}
                    for sign in (1.0, -1.0):
                        z_i = r_com[:, None] + b.beta_a * sign * x[None, :]
                        z_a = r_com[:, None] - b.beta_i * sign * x[None, :] - side * d
                        ion = ho_wavefunctions(n_i + 1, cfg.m_i, cfg.omega_i, z_i.ravel())[n_i]
                        atom = ho_wavefunctions(n_a + 1, cfg.m_a, cfg.omega_a, z_a.ravel())[n_a]
                        amp = (ion * atom).reshape(z_i.shape)
                        proj[sign] = (f_com @ amp) @ psi_w.T
                    coeff = (proj[1.0] + par[None, :] * proj[-1.0]) / math.sqrt(2.0)
                    c = coeff.ravel()
                    captured = float(c @ c)
                    states.append(
                        ReferenceState(
                            n_i=n_i,
                            n_a=n_a,
                            side=side,
                            coefficients=c / math.sqrt(max(captured, 1e-300)),
                            captured=captured,
                        )
                    )
        low = [s for s in states if s.captured < 0.9]
        if low:
            logger.warning(
                "reference states poorly captured by the basis (min %.3f)",
                min(s.captured for s in low),
            )
        return states

    def fock_weights(
        self, vectors: np.ndarray, references: Sequence[ReferenceState]
    ) -> tuple[list[tuple[int, int]], np.ndarray]:
        """(n_i, n_a) 별 좌/우 두 기준 상태 부분공간으로의 가중치."""
        keys = sorted({(s.n_i, s.n_a) for s in references})
        weights = np.zeros((len(keys), vectors.shape[1]))
        for i, key in enumerate(keys):
            pair = [s for s in references if (s.n_i, s.n_a) == key]
            basis_lr = np.column_stack([s.coefficients for s in pair])
            q, _ = np.linalg.qr(basis_lr)
            weights[i] = np.sum((q.T @ vectors) ** 2, axis=0)
        return keys, weights

    def localized_pair(
        self, d: float, n_i: int = 0, n_levels: int = 60
    ) -> tuple[np.ndarray, np.ndarray]:
        """d 에서 |n_i, 0⟩ 쌍의 왼쪽/오른쪽 국소화 조합 (L, R)."""
        energies, vectors, parity = self.diagonalize(d, n_levels)
        refs = self.reference_states(d, n_i_max=n_i, n_a_max=0)
        keys, weights = self.fock_weights(vectors, refs)
        w = weights[keys.index((n_i, 0))]
        even = np.flatnonzero(parity > 0)
        odd = np.flatnonzero(parity < 0)
        v_g = vectors[:, even[np.argmax(w[even])]]
        v_e = vectors[:, odd[np.argmax(w[odd])]]
        za = self.atom_position(np.column_stack([v_g, v_e]))
        s = 1.0 if za[0, 1] >= 0.0 else -1.0
        right = (v_g + s * v_e) / math.sqrt(2.0)
        left = (v_g - s * v_e) / math.sqrt(2.0)
        pos = self.atom_position(np.column_stack([left, right]))
        if min(abs(pos[0, 0]), abs(pos[1, 1])) < 0.5 * d:
            raise DomainError(
                f"states of ion level {n_i} are delocalized at d={d:.4g} "
                f"(<z_a> = {pos[0, 0]:.3g}, {pos[1, 1]:.3g}); use a larger d_end"
            )
        return left, right


def fock_labels(
    keys: Sequence[tuple[int, int]],
    weights: np.ndarray,
    parity: np.ndarray,
    bound_weight: np.ndarray,
    margin: float = LABEL_MARGIN,
) -> tuple[list[str], list[tuple[int, int]]]:
    """가중치 최대 Fock 레이블. 1, 2 위가 margin 이내면 unlabeled."""
    labels: list[str] = []
    fock: list[tuple[int, int]] = []
    n_mol = 0
    for j in range(weights.shape[1]):
        if bound_weight[j] > 0.5:
            labels.append(f"mol{n_mol}")
            fock.append((-1, -1))
            n_mol += 1
            continue
        col = weights[:, j]
        order = np.argsort(col)[::-1]
        best = int(order[0])
        if (order.size > 1 and col[best] - col[order[1]] < margin) or col[best] < 0.5:
            labels.append(UNLABELED)
            fock.append((-1, -1))
            continue
        n_i, n_a = keys[best]
        sign = "+" if parity[j] > 0 else "-"
        label = f"|{n_i},{n_a}>{sign}"
        if label in labels:
            labels.append(UNLABELED)
            fock.append((-1, -1))
            continue
        labels.append(label)
        fock.append((n_i, n_a))
    return labels, fock


def ion_pair_tracks(sweep: SpectrumSweep, n_i: int) -> tuple[int, int]:
    return sweep.track_of_label(f"|{n_i},0>+"), sweep.track_of_label(f"|{n_i},0>-")


def convergence_drift(
    model: TwoBodyModel, d: float, fraction: float = 0.8, n_levels: int = 24
) -> float:
    """기저를 줄였을 때 최저 두 트랩 준위 차(J)의 상대 변화."""

    def splitting(m: TwoBodyModel) -> float:
        e, v, p = m.diagonalize(d, n_levels)
        trap = m.bound_weight(v) <= 0.5
        e_even = e[trap & (p > 0)]
        e_odd = e[trap & (p < 0)]
        if e_even.size == 0 or e_odd.size == 0:
            raise PreconditionError("no trap pair found for the convergence check")
        return float(e_odd[0] - e_even[0])

    b = model.basis
    small = TwoBodyModel(
        b.subset(max(1, int(round(b.n_com * fraction))), max(2, int(round(b.n_rel * fraction))))
    )
    j_full = splitting(model)
    j_small = splitting(small)
    return abs(j_full - j_small) / max(abs(j_full), 1e-300)


def two_body_sweep(
    model: TwoBodyModel,
    d_list: Sequence[float],
    *,
    n_levels: int = 40,
    n_i_max: int = 2,
    n_a_max: int = 1,
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR,
    drift_tol: float = 0.01,
    check_convergence: bool = True,
    threads: Optional[int] = None,
) -> SpectrumSweep:
    """d 스윕, 추적, 가장 큰 d 에서의 |n_i, n_a⟩± 레이블."""
    ds = [float(d) for d in d_list]
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
            "model": "two-body",
            "n_com": model.basis.n_com,
            "n_rel": model.basis.n_rel,
            "basis_size": model.basis.size,
            "interacting": model.config.interacting,
            "omega_com": model.basis.omega_com,
            "omega_rel": model.basis.omega_rel,
        },
    )
    d_max = float(sweep.d_values[0])
    refs = model.reference_states(d_max, n_i_max=n_i_max, n_a_max=n_a_max)
    keys, weights = model.fock_weights(sweep.vectors[0], refs)
    sweep.labels, fock = fock_labels(
        keys, weights, sweep.parity[0], model.bound_weight(sweep.vectors[0])
    )
    sweep.metadata["fock_labels"] = fock
    sweep.metadata["reference_capture"] = min(s.captured for s in refs)

    if check_convergence:
        drift = convergence_drift(model, float(sweep.d_values[-1]))
        sweep.metadata["basis_drift"] = drift
        if drift > drift_tol:
            warnings.warn(
                f"two-body basis not converged at d={sweep.d_values[-1]:.4g}: "
                f"ground-pair splitting changes by {drift:.2%} on a 20% smaller basis",
                ConvergenceWarning,
                stacklevel=2,
            )
    logger.info(
        "two-body sweep: %d d-values, %d labelled tracks",
        sweep.n_d,
        sum(1 for s in sweep.labels if s != UNLABELED),
    )
    return sweep


def ion_resolved_tunnelling(
    sweep: SpectrumSweep, n_i_max: int = 1, *, window: int = 1
) -> dict[int, TunnellingTable]:
    """n_i 별 J_{n_i}(d) 표."""
    out = {}
    for n_i in range(int(n_i_max) + 1):
        out[n_i] = tunnelling_rate(sweep, ion_pair_tracks(sweep, n_i), window=window)
    return out


@dataclass(frozen=True)
class DensityGrid:
    z_i: np.ndarray
    z_a: np.ndarray
    abs_psi: np.ndarray
    norm: float


def wavefunction_density(
    model: TwoBodyModel,
    sweep: SpectrumSweep,
    track: int,
    d: float,
    z_i: np.ndarray,
    z_a: np.ndarray,
) -> DensityGrid:
    """|ψ(z_i, z_a)| 를 기저 합성으로 격자 위에 계산합니다."""
    if sweep.vectors is None:
        raise PreconditionError("sweep has no stored eigenvectors")
    vec = sweep.track_vectors(track)[sweep.d_index(d)]
    return density_from_vector(model, vec, z_i, z_a)


def density_from_vector(
    model: TwoBodyModel, vector: np.ndarray, z_i: np.ndarray, z_a: np.ndarray
) -> DensityGrid:
    b = model.basis
    cfg = model.config
    zi = np.asarray(z_i, dtype=float)
    za = np.asarray(z_a, dtype=float)
    gi, ga = np.meshgrid(zi, za, indexing="ij")
    r_com = (b.beta_i * gi + b.beta_a * ga).ravel()
    r_rel = (gi - ga).ravel()

    l_com = ho_length(cfg.total_mass, b.omega_com)
    com_edge = l_com * (math.sqrt(2.0 * b.n_com + 1.0) + 2.0)
    if np.abs(r_com).max() > com_edge or np.abs(r_rel).max() > b.rel.grid.x_max:
        warnings.warn(
            "density grid extends beyond the product-basis support",
            BasisSupportWarning,
            stacklevel=2,
        )

    f = ho_wavefunctions(b.n_com, cfg.total_mass, b.omega_com, r_com)
    phi = b.rel.full_line(r_rel)
    c = np.asarray(vector).reshape(b.n_com, b.n_rel)
    psi = np.einsum("nk,np,kp->p", c, f, phi, optimize=True).reshape(gi.shape)
    dzi = float(zi[1] - zi[0]) if zi.size > 1 else 1.0
    dza = float(za[1] - za[0]) if za.size > 1 else 1.0
    norm = float(np.sum(psi**2) * dzi * dza)
    return DensityGrid(z_i=zi, z_a=za, abs_psi=np.abs(psi), norm=norm)
