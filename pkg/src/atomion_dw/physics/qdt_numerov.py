"""단일 좌표 해밀토니안의 고유값 풀이기 (QDT 경계조건 + renormalized Numerov).

풀이 대상 (무차원, ħ = 1, μ = 1/2):

    -(1/ξ²) ψ'' + [ (ξ²/4) ω² x² - c/x⁴ + l(l+1)/(ξ² x²) - E ] ψ = 0

- ξ = sqrt(m/μ) 는 경계 위상의 질량 인자 (원자 좌표: sqrt(m_a/μ), 상대 좌표: 1)
- c = 1 (상호작용) 또는 0 (조화진동자 극한, 원점 정칙 경계)
- 1D 는 반직선 x > 0 에서 parity 별로 풀고, 전체 직선 함수는 대칭으로 복원합니다.

격자는 s = ln x + x/x_c 로 정의되는 균일 s-격자입니다 (x_c 아래는 기하 간격,
위는 균일 간격). ψ = sqrt(x') φ 로 바꾸면 φ'' = G φ 형태가 유지되어 Numerov 를
그대로 쓸 수 있습니다. 상호작용 없는 1D 문제만 x = 0 에서 시작하는 균일 격자를
씁니다 (짝: 거울 시작, 홀: F_0 = 0).

x_min 의 경계조건은 ψ_bc 의 로그 미분으로 주어지고, 첫 두 격자점 값은 에너지 E 의
방정식을 RK4 로 한 칸 적분해서 얻습니다.

고유값 탐색:
- 바깥/안쪽 ratio 재귀 (Johnson) 의 음수 pivot 개수 = E 아래 고유값 개수
- 이 개수로 여러 고유값을 동시에 이분 탐색하고, 매칭 불일치 D(E) 로 마무리
- 간격을 두 배씩 줄인 격자들의 고유값을 Romberg 외삽 (오차 h⁴, h⁶, ...)
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Literal, Optional, Sequence

import numpy as np
from scipy import special

from atomion_dw.core.cache import ArrayCache, content_hash
from atomion_dw.core.errors import (
    ConvergenceWarning,
    DomainError,
    PreconditionError,
    SolverError,
)
from atomion_dw.core.workers import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_PPW = 20.0
DEFAULT_DOMINANCE = 1e3
DEFAULT_N_BOUND_KEEP = 2
DEFAULT_REFINEMENT = 4
ENERGY_TOL = 1e-10
RESOLVE_TOL = 1e-9
REFINE_TOL = 1e-7

_T_LIMIT = 0.5
_POLE_WINDOW = 1e-3
_FREE_X_MIN = 1e-7
_SAMPLE_POINTS = 4096
_START_SUBSTEPS = 64

Kind = Literal["1d", "3d"]
Mapping = Literal["log", "linear"]
_MAPPINGS: tuple[str, ...] = ("log", "linear")


def _positive(name: str, value: float) -> float:
    v = float(value)
    if not math.isfinite(v) or v <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return v


@dataclass(frozen=True)
class ShortRangePhases:
    """짝/홀 (1D) 및 3D 단거리 위상 [rad]. π 주기로만 의미가 있습니다."""

    phi_even: float = 0.0
    phi_odd: float = 0.0
    phi_3d: float = 0.0

    def for_parity(self, parity: int) -> float:
        return self.phi_even if parity > 0 else self.phi_odd

    def shifted(self, turns: int = 1) -> "ShortRangePhases":
        shift = math.pi * turns
        return ShortRangePhases(
            self.phi_even + shift, self.phi_odd + shift, self.phi_3d + shift
        )


# --- coordinate map ------------------------------------------------------


def _s_of_x(x: Any, x_c: float) -> Any:
    return np.log(x) + np.asarray(x) / x_c


def _x_of_s(s: np.ndarray, x_c: float) -> np.ndarray:
    """s = ln x + x/x_c 의 역함수: x = x_c W(e^s / x_c)."""
    lam = np.asarray(s, dtype=float) - math.log(x_c)
    w = np.empty_like(lam)
    small = lam < 700.0
    w[small] = special.lambertw(np.exp(lam[small])).real
    big = ~small
    w[big] = lam[big] - np.log(lam[big])
    # w + ln w = lam 에 대한 Newton 보정 (큰 인자 점근식도 여기서 정확해짐)
    for _ in range(4):
        w = w - (w + np.log(w) - lam) / (1.0 + 1.0 / w)
    return x_c * w


def _map_derivatives(
    x: np.ndarray, x_c: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = x * x_c / (x + x_c)
    fp = x_c**2 / (x + x_c) ** 2
    fpp = -2.0 * x_c**2 / (x + x_c) ** 3
    return f, fp * f, (fpp * f + fp**2) * f


def _liouville(d1: np.ndarray, d2: np.ndarray, d3: np.ndarray) -> np.ndarray:
    return 0.75 * (d2 / d1) ** 2 - 0.5 * d3 / d1


def _end_corrected(n_points: int) -> np.ndarray:
    """끝점 보정 사다리꼴 가중치 (O(h⁴))."""
    c = np.ones(n_points)
    c[:3] = (3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0)
    c[-3:] = (23.0 / 24.0, 7.0 / 6.0, 3.0 / 8.0)
    return c


def _local_g(
    x: np.ndarray,
    energy: float,
    mass_factor: float,
    omega: float,
    centrifugal: float,
    coupling: float,
) -> np.ndarray:
    """ψ'' = g ψ 의 g(x, E). 계수가 0 인 특이항은 x = 0 에서도 계산하지 않습니다."""
    xi2 = mass_factor**2
    potential = 0.25 * xi2 * omega**2 * x**2
    if coupling:
        potential = potential - coupling / x**4
    g = xi2 * (potential - energy)
    if centrifugal:
        g = g + centrifugal / x**2
    return g


@dataclass(frozen=True)
class RadialGrid:
    """균일 s-격자. 배열 필드는 생성 시 계산되며 비교에서 제외됩니다.

    - mapping="log": s = ln x + x/x_c (x_min > 0)
    - mapping="linear": s = x, x_min = 0 (원점 정칙 1D 문제 전용)
    - refinement: 가장 성긴 외삽 단계 대비 세분 배수 (2 의 거듭제곱).
      points_per_wavelength 는 가장 성긴 단계 기준입니다.
    """

    x_min: float
    x_max: float
    x_c: float
    n_intervals: int
    e_max: float
    points_per_wavelength: float = DEFAULT_PPW
    dominance: float = DEFAULT_DOMINANCE
    mapping: Mapping = "log"
    refinement: int = 1
    s: np.ndarray = field(init=False, repr=False, compare=False)
    x: np.ndarray = field(init=False, repr=False, compare=False)
    jacobian: np.ndarray = field(init=False, repr=False, compare=False)
    liouville: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.mapping not in _MAPPINGS:
            raise PreconditionError(f"unknown grid mapping {self.mapping!r}")
        linear = self.mapping == "linear"
        low_ok = self.x_min == 0.0 if linear else self.x_min > 0.0
        if not (low_ok and self.x_min < self.x_max):
            raise PreconditionError(
                f"invalid grid bounds x_min={self.x_min!r}, x_max={self.x_max!r} "
                f"for mapping {self.mapping!r}"
            )
        if self.n_intervals < 8:
            raise PreconditionError(f"too few grid intervals: {self.n_intervals}")
        r = int(self.refinement)
        if r < 1 or r & (r - 1) or self.n_intervals % r:
            raise PreconditionError(
                f"refinement {r} must be a power of two dividing {self.n_intervals}"
            )
        if linear:
            s = np.linspace(self.x_min, self.x_max, self.n_intervals + 1)
            x = s.copy()
            d1 = np.ones_like(x)
            liouville = np.zeros_like(x)
            # 짝함수 적분에서 x = 0 쪽 사다리꼴은 끝점 오차가 없음
            weights = (s[1] - s[0]) * d1
            weights[0] *= 0.5
            weights[-1] *= 0.5
        else:
            s0 = float(_s_of_x(self.x_min, self.x_c))
            s1 = float(_s_of_x(self.x_max, self.x_c))
            s = s0 + (s1 - s0) / self.n_intervals * np.arange(self.n_intervals + 1)
            x = _x_of_s(s, self.x_c)
            x[0], x[-1] = self.x_min, self.x_max
            d1, d2, d3 = _map_derivatives(x, self.x_c)
            liouville = _liouville(d1, d2, d3)
            weights = (s[1] - s[0]) * d1 * _end_corrected(x.size)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "jacobian", d1)
        object.__setattr__(self, "liouville", liouville)
        object.__setattr__(self, "weights", weights)

    @property
    def ds(self) -> float:
        return float(self.s[1] - self.s[0])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.x)

    @property
    def n_points(self) -> int:
        return self.n_intervals + 1

    @property
    def x_qdt(self) -> float:
        """기하 간격 구간과 균일 구간의 경계 (균일 격자면 x_min)."""
        return self.x_min if self.mapping == "linear" else self.x_c

    def params(self) -> dict[str, Any]:
        return {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "x_c": self.x_c,
            "n_intervals": self.n_intervals,
            "e_max": self.e_max,
            "points_per_wavelength": self.points_per_wavelength,
            "dominance": self.dominance,
            "mapping": self.mapping,
            "refinement": self.refinement,
        }

    def same_as(self, other: "RadialGrid") -> bool:
        return self is other or self.params() == other.params()

    def to_array(self) -> np.ndarray:
        p = self.params()
        p["mapping"] = _MAPPINGS.index(self.mapping)
        return np.array([float(p[k]) for k in _GRID_KEYS])

    @classmethod
    def from_array(cls, values: np.ndarray) -> "RadialGrid":
        p = dict(zip(_GRID_KEYS, (float(v) for v in values)))
        return cls(
            x_min=p["x_min"],
            x_max=p["x_max"],
            x_c=p["x_c"],
            n_intervals=int(round(p["n_intervals"])),
            e_max=p["e_max"],
            points_per_wavelength=p["points_per_wavelength"],
            dominance=p["dominance"],
            mapping=_MAPPINGS[int(round(p["mapping"]))],
            refinement=int(round(p["refinement"])),
        )

    def refined(self, factor: int = 2) -> "RadialGrid":
        """같은 범위에서 모든 간격을 1/factor 로 줄인 격자 (수렴 검사용)."""
        f = int(factor)
        if f < 1:
            raise PreconditionError(f"refinement factor must be >= 1, got {factor!r}")
        return replace(
            self,
            n_intervals=self.n_intervals * f,
            points_per_wavelength=self.points_per_wavelength * f,
        )

    def levels(self) -> list["RadialGrid"]:
        """외삽 단계 격자들: 가장 성긴 것부터 자기 자신까지, 간격 2 배씩."""
        out = [self]
        while out[-1].refinement > 1:
            g = out[-1]
            out.append(
                replace(g, n_intervals=g.n_intervals // 2, refinement=g.refinement // 2)
            )
        return out[::-1]


_GRID_KEYS = (
    "x_min",
    "x_max",
    "x_c",
    "n_intervals",
    "e_max",
    "points_per_wavelength",
    "dominance",
    "mapping",
    "refinement",
)


def build_grid(
    mass_factor: float,
    omega: float,
    e_max: float,
    *,
    kind: Kind = "1d",
    l: int = 0,
    interacting: bool = True,
    e_min: float = 0.0,
    points_per_wavelength: float = DEFAULT_PPW,
    dominance: float = DEFAULT_DOMINANCE,
    refinement: int = DEFAULT_REFINEMENT,
    x_min: Optional[float] = None,
    x_max: Optional[float] = None,
    x_c: Optional[float] = None,
) -> RadialGrid:
    """E ≤ e_max 상태를 points_per_wavelength 로 샘플링하는 격자.

    - x_min: 1/x_min⁴ = dominance · e_max (상호작용), 정칙 경계면 아주 작은 값.
      상호작용 없는 1D 는 x = 0 에서 시작하는 균일 격자입니다.
    - x_max: (ξ²/4) ω² x_max² = e_max + 20 ω
    - e_min: 가장 깊은 상태의 에너지. Numerov 의 T = ds² G/12 가 극점에
      가까워지지 않도록 간격을 제한합니다.
    - refinement: 외삽 단계 수를 정하는 세분 배수. 간격 조건은 가장 성긴
      단계에 적용되고, 돌려주는 격자는 가장 고운 단계입니다.
    """
    xi = _positive("mass_factor", mass_factor)
    om = _positive("omega", omega)
    ppw = _positive("points_per_wavelength", points_per_wavelength)
    e_top = max(float(e_max), om)
    ho_len = 1.0 / math.sqrt(0.5 * xi**2 * om)
    linear = kind == "1d" and not interacting

    if x_min is None:
        if linear:
            x_min = 0.0
        else:
            x_min = (dominance * e_top) ** -0.25 if interacting else _FREE_X_MIN * ho_len
    if x_max is None:
        x_max = 2.0 * math.sqrt(e_top + 20.0 * om) / (xi * om)
    if x_c is None:
        if linear:
            x_c = x_max
        else:
            x_c = 1.0 / (x_min * math.sqrt(e_top)) if interacting else 0.5 * ho_len
    x_min, x_max, x_c = float(x_min), float(x_max), float(x_c)
    if not (0.0 <= x_min < x_max) or (x_min == 0.0 and not linear):
        raise PreconditionError(f"invalid grid bounds x_min={x_min!r}, x_max={x_max!r}")

    coupling = 1.0 if interacting else 0.0
    centrifugal = float(l * (l + 1)) if kind == "3d" else 0.0
    if linear:
        sample = np.linspace(x_min, x_max, _SAMPLE_POINTS)
        f = np.ones_like(sample)
    else:
        sample = np.geomspace(x_min, x_max, _SAMPLE_POINTS)
        f = sample * x_c / (sample + x_c)

    k2 = -_local_g(sample, e_top, xi, om, centrifugal, coupling)
    kf = np.sqrt(np.clip(k2, 0.0, None)) * f
    ds = 2.0 * math.pi / (ppw * float(kf.max())) if kf.max() > 0 else 0.05

    g_low = f**2 * _local_g(sample, min(float(e_min), 0.0), xi, om, centrifugal, coupling)
    if g_low.max() > 0:
        ds = min(ds, math.sqrt(12.0 * 0.5 * _T_LIMIT / float(g_low.max())))

    if linear:
        span = x_max - x_min
    else:
        span = float(_s_of_x(x_max, x_c) - _s_of_x(x_min, x_c))
    n_coarse = max(64, int(math.ceil(span / ds)))
    grid = RadialGrid(
        x_min=x_min,
        x_max=x_max,
        x_c=x_c,
        n_intervals=int(refinement) * n_coarse,
        e_max=e_top,
        points_per_wavelength=ppw,
        dominance=float(dominance),
        mapping="linear" if linear else "log",
        refinement=int(refinement),
    )
    logger.debug(
        "grid: %s x=[%.4g, %.4g], x_c=%.4g, %d points (x%d), e_max=%.4g",
        grid.mapping,
        x_min,
        x_max,
        x_c,
        grid.n_points,
        grid.refinement,
        e_top,
    )
    return grid


# --- basis / moments -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialBasis:
    """격자 위 고유함수 묶음.

    - 1D: 반직선 정규화(∫_0^∞ ψ² = 1) + 상태별 parity. 전체 직선 함수는
      Ψ(x) = (sign x)^{(1-π)/2} ψ(|x|)/√2 입니다.
    - 3D: 반지름 함수 u(r) (∫ u² dr = 1) + 상태별 부분파 l.
    """

    label: str
    kind: Kind
    energies: np.ndarray
    wavefunctions: np.ndarray
    grid: RadialGrid
    parity: np.ndarray
    l: np.ndarray
    mass_factor: float
    omega: float
    phase: np.ndarray
    interacting: bool = True
    n_bound: int = 0
    _moments: dict[int, np.ndarray] = field(
        default_factory=dict, repr=False, compare=False
    )

    @property
    def size(self) -> int:
        return int(self.energies.size)

    def moment(self, j: int) -> np.ndarray:
        """M^(j) (같은 기저끼리), 계산 후 캐시."""
        if j not in self._moments:
            self._moments[j] = moments(self, self, j).matrix
        return self._moments[j]

    def gram(self) -> np.ndarray:
        return self.moment(0)

    def subset(self, index: Sequence[int], label: Optional[str] = None) -> "RadialBasis":
        idx = np.asarray(index, dtype=int)
        return RadialBasis(
            label=label or self.label,
            kind=self.kind,
            energies=self.energies[idx],
            wavefunctions=self.wavefunctions[idx],
            grid=self.grid,
            parity=self.parity[idx],
            l=self.l[idx],
            mass_factor=self.mass_factor,
            omega=self.omega,
            phase=self.phase[idx],
            interacting=self.interacting,
            n_bound=int(np.sum(self.energies[idx] < 0.0)),
        )

    def full_line(self, x: np.ndarray) -> np.ndarray:
        """1D 기저를 전체 직선 위 임의 점에서 보간 (모양: size × len(x))."""
        if self.kind != "1d":
            raise PreconditionError("full_line is defined for 1D bases only")
        xs = np.asarray(x, dtype=float)
        ax = np.abs(xs)
        out = np.empty((self.size, xs.size))
        for k in range(self.size):
            out[k] = np.interp(ax, self.grid.x, self.wavefunctions[k], left=0.0, right=0.0)
        odd = self.parity < 0
        out[odd] *= np.sign(xs)[None, :]
        return out / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    order: int
    coordinate: str
    matrix: np.ndarray

    def asymmetry(self) -> float:
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            return float("nan")
        scale = max(float(np.abs(m).max()), 1e-300)
        return float(np.abs(m - m.T).max()) / scale


def moments(
    basis_bra: RadialBasis, basis_ket: RadialBasis, j: int, coordinate: str = "r"
) -> MomentMatrix:
    """M^(j)_{kk'} = ∫ ψ_k x^j ψ_k' dx (1D 는 전체 직선, 3D 는 반지름 적분)."""
    if j not in (0, 1, 2, 3, 4):
        raise DomainError(f"moment order must be 0..4, got {j!r}")
    if basis_bra.kind != basis_ket.kind or not basis_bra.grid.same_as(basis_ket.grid):
        raise PreconditionError("moments require both bases on the same grid")
    grid = basis_bra.grid
    kernel = grid.weights * grid.x**j
    m = (basis_bra.wavefunctions * kernel[None, :]) @ basis_ket.wavefunctions.T
    if basis_bra.kind == "1d":
        allowed = np.outer(basis_bra.parity, basis_ket.parity) * (-1) ** j == 1
        m = np.where(allowed, m, 0.0)
    if basis_bra is basis_ket:
        m = 0.5 * (m + m.T)
    return MomentMatrix(order=j, coordinate=coordinate, matrix=m)


def merge_parities(even: RadialBasis, odd: RadialBasis) -> RadialBasis:
    """짝/홀 기저를 에너지 순으로 합칩니다."""
    if even.kind != "1d" or odd.kind != "1d" or not even.grid.same_as(odd.grid):
        raise PreconditionError("merge_parities needs two 1D bases on one grid")
    energies = np.concatenate([even.energies, odd.energies])
    order = np.argsort(energies, kind="stable")
    return RadialBasis(
        label="merged",
        kind="1d",
        energies=energies[order],
        wavefunctions=np.vstack([even.wavefunctions, odd.wavefunctions])[order],
        grid=even.grid,
        parity=np.concatenate([even.parity, odd.parity])[order],
        l=np.concatenate([even.l, odd.l])[order],
        mass_factor=even.mass_factor,
        omega=even.omega,
        phase=np.concatenate([even.phase, odd.phase])[order],
        interacting=even.interacting,
        n_bound=even.n_bound + odd.n_bound,
    )


def merge_partial_waves(blocks: Sequence[RadialBasis]) -> RadialBasis:
    """부분파별 기저를 l 순서대로 이어 붙입니다 (l-블록 구조 유지)."""
    if not blocks:
        raise PreconditionError("no partial waves to merge")
    first = blocks[0]
    if any(b.kind != "3d" or not b.grid.same_as(first.grid) for b in blocks):
        raise PreconditionError("partial waves must share one 3D grid")
    return RadialBasis(
        label=f"l<={int(max(int(b.l.max()) for b in blocks))}",
        kind="3d",
        energies=np.concatenate([b.energies for b in blocks]),
        wavefunctions=np.vstack([b.wavefunctions for b in blocks]),
        grid=first.grid,
        parity=np.concatenate([b.parity for b in blocks]),
        l=np.concatenate([b.l for b in blocks]),
        mass_factor=first.mass_factor,
        omega=first.omega,
        phase=np.concatenate([b.phase for b in blocks]),
        interacting=first.interacting,
        n_bound=sum(b.n_bound for b in blocks),
    )


def node_counts(basis: RadialBasis, x_from: Optional[float] = None) -> np.ndarray:
    """x ≥ x_from 에서의 부호 변화 수 (상태별)."""
    start = basis.grid.x[0] if x_from is None else float(x_from)
    mask = basis.grid.x >= start
    out = np.zeros(basis.size, dtype=int)
    for k in range(basis.size):
        signs = np.sign(basis.wavefunctions[k, mask])
        signs = signs[signs != 0]
        out[k] = int(np.count_nonzero(signs[1:] != signs[:-1]))
    return out


# --- solver ----------------------------------------------------------------


class _GridRangeError(PreconditionError):
    """현재 격자가 요청된 에너지 창을 담지 못함 (자동 격자면 재생성)."""

    def __init__(self, message: str, *, e_low: float = 0.0, e_high: float = 0.0):
        super().__init__(message)
        self.e_low = e_low
        self.e_high = e_high


@dataclass(frozen=True, eq=False)
class _BlockSolution:
    energies: np.ndarray
    wavefunctions: np.ndarray
    n_bound: int
    first: int = 0


class RadialProblem:
    """한 대칭 블록(1D parity 또는 3D l)의 이산 고유값 문제."""

    def __init__(
        self,
        grid: RadialGrid,
        mass_factor: float,
        omega: float,
        *,
        kind: Kind = "1d",
        parity: int = 1,
        l: int = 0,
        phase: float = 0.0,
        interacting: bool = True,
    ) -> None:
        if kind == "3d" and l < 0:
            raise DomainError(f"partial wave l must be >= 0, got {l!r}")
        if grid.mapping == "linear" and (interacting or kind == "3d"):
            raise PreconditionError("a linear grid from x = 0 only supports the free 1D problem")
        self.grid = grid
        self.mass_factor = _positive("mass_factor", mass_factor)
        self.omega = _positive("omega", omega)
        self.kind = kind
        self.parity = 1 if kind == "3d" else (1 if parity > 0 else -1)
        self.l = int(l) if kind == "3d" else 0
        self.phase = float(phase)
        self.interacting = bool(interacting)
        self._coupling = 1.0 if interacting else 0.0
        self._centrifugal = float(self.l * (self.l + 1))

        jac2 = grid.jacobian**2
        g_zero = self._g_zero(grid.x)
        scale = grid.ds**2 / 12.0
        self._t0 = scale * (jac2 * g_zero + grid.liouville)
        self._t1 = scale * self.mass_factor**2 * jac2
        if grid.mapping == "log":
            self._prepare_start()

    def _g_zero(self, x: np.ndarray) -> np.ndarray:
        return _local_g(
            x, 0.0, self.mass_factor, self.omega, self._centrifugal, self._coupling
        )

    # boundary ---------------------------------------------------------------

    def _boundary_values(self, x: float) -> tuple[float, float]:
        """x_min 에서 경계 함수 ψ_bc 와 그 도함수."""
        xi = self.mass_factor
        if not self.interacting:
            p = (0 if self.parity > 0 else 1) if self.kind == "1d" else self.l + 1
            return x**p, (p * x ** (p - 1) if p else 0.0)
        if self.kind == "1d":
            theta = xi / x + self.phase
            return x * math.sin(theta), math.sin(theta) - xi / x * math.cos(theta)
        nu = self.l + 0.5
        delta = -self.phase - 0.5 * self.l * math.pi
        z = xi / x
        a, b = 1.0, math.tan(delta)
        off_pole = (delta - 0.5 * math.pi) % math.pi
        if min(off_pole, math.pi - off_pole) < _POLE_WINDOW:
            # tan δ 극점 근처: cot δ J + Y
            a, b = 1.0 / math.tan(delta), 1.0
        c = a * special.jv(nu, z) + b * special.yv(nu, z)
        dc = a * special.jvp(nu, z) + b * special.yvp(nu, z)
        rx = math.sqrt(x)
        return rx * c, 0.5 * c / rx - rx * dc * xi / x**2

    def _prepare_start(self) -> None:
        """[s_0, s_1] 의 RK4 반걸음 점에서 G(s, E) = a(s) - E b(s) 계수와 φ(s_0)."""
        grid = self.grid
        h = grid.ds / _START_SUBSTEPS
        s = grid.s[0] + 0.5 * h * np.arange(2 * _START_SUBSTEPS + 1)
        x = _x_of_s(s, grid.x_c)
        x[0] = grid.x_min
        d1, d2, d3 = _map_derivatives(x, grid.x_c)
        self._rk_a = d1**2 * self._g_zero(x) + _liouville(d1, d2, d3)
        self._rk_b = self.mass_factor**2 * d1**2
        self._rk_h = h
        psi, dpsi = self._boundary_values(grid.x_min)
        j0, j1 = float(d1[0]), float(d2[0])
        self._phi0 = psi / math.sqrt(j0)
        self._dphi0 = math.sqrt(j0) * dpsi - psi * j1 / (2.0 * j0**1.5)

    def _start_phi(self, energies: np.ndarray) -> np.ndarray:
        """φ(s_1; E): x_min 의 경계 데이터에서 에너지 E 방정식을 한 칸 적분."""
        a, b, h = self._rk_a, self._rk_b, self._rk_h
        y = np.full(energies.shape, self._phi0)
        dy = np.full(energies.shape, self._dphi0)
        for j in range(_START_SUBSTEPS):
            ga = a[2 * j] - b[2 * j] * energies
            gm = a[2 * j + 1] - b[2 * j + 1] * energies
            gb = a[2 * j + 2] - b[2 * j + 2] * energies
            k1y, k1d = dy, ga * y
            k2y, k2d = dy + 0.5 * h * k1d, gm * (y + 0.5 * h * k1y)
            k3y, k3d = dy + 0.5 * h * k2d, gm * (y + 0.5 * h * k2y)
            k4y, k4d = dy + h * k3d, gb * (y + h * k3y)
            y = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            dy = dy + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        return y

    def _start_ratio(self, t: np.ndarray, u: np.ndarray, energies: np.ndarray) -> np.ndarray:
        """r_out[0] = F_1 / F_0."""
        if self.grid.mapping == "linear":
            if self.parity > 0:
                return 0.5 * u[0]  # 거울 시작 F_{-1} = F_1
            return np.full(energies.shape, np.inf)  # F_0 = 0
        phi1 = self._start_phi(energies)
        return (1.0 - t[1]) * phi1 / ((1.0 - t[0]) * self._phi0)

    # recurrences --------------------------------------------------------------

    def _t(self, energies: np.ndarray) -> np.ndarray:
        return self._t0[:, None] - self._t1[:, None] * energies[None, :]

    def _ratios(
        self, t: np.ndarray, energies: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            u = (2.0 + 10.0 * t) / (1.0 - t)
            n1 = t.shape[0]
            r_out = np.empty_like(t)
            r_out[0] = self._start_ratio(t, u, energies)
            for n in range(1, n1):
                r_out[n] = u[n] - 1.0 / r_out[n - 1]
            r_in = np.empty_like(t)
            r_in[-1] = u[-1]
            for n in range(n1 - 2, -1, -1):
                r_in[n] = u[n] - 1.0 / r_in[n + 1]
        return u, r_out, r_in

    @staticmethod
    def _turning_index(t: np.ndarray) -> np.ndarray:
        allowed = t < 0.0
        n1 = t.shape[0]
        last = n1 - 1 - np.argmax(allowed[::-1], axis=0)
        last = np.where(allowed.any(axis=0), last, 2)
        return np.clip(last, 2, n1 - 3)

    def _inertia(
        self, energies: Any, match: Optional[np.ndarray] = None
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        e = np.atleast_1d(np.asarray(energies, dtype=float))
        t = self._t(e)
        u, r_out, r_in = self._ratios(t, e)
        m = self._turning_index(t) if match is None else np.asarray(match, dtype=int)
        cols = np.arange(e.size)
        neg_out = np.cumsum(r_out < 0.0, axis=0)
        neg_in = np.cumsum((r_in < 0.0)[::-1], axis=0)[::-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            d = -u[m, cols] + 1.0 / r_out[m - 1, cols] + 1.0 / r_in[m + 1, cols]
        count = neg_out[m - 1, cols] + neg_in[m + 1, cols] + (d > 0.0)
        return count.astype(int), d, m

    def count(self, energies: Any) -> np.ndarray:
        """E 아래 고유값 개수 (Sturm 계수)."""
        return self._inertia(energies)[0]

    def outward_node_count(self, energies: Any) -> np.ndarray:
        """x_min 에서 바깥으로 끝까지 적분한 해의 부호 변화 수."""
        e = np.atleast_1d(np.asarray(energies, dtype=float))
        _, r_out, _ = self._ratios(self._t(e), e)
        return np.count_nonzero(r_out < 0.0, axis=0)

    def mismatch(self, energies: Any, match: np.ndarray) -> np.ndarray:
        return self._inertia(energies, match)[1]

    def max_t(self, energy: float) -> float:
        return float(self._t(np.array([float(energy)])).max())

    def min_points_per_wavelength(self, energy: float) -> float:
        """E 에서 실제 격자의 최소 파장당 점 수."""
        g = -self._t(np.array([float(energy)]))[:, 0] * 12.0 / self.grid.ds**2
        k = np.sqrt(np.clip(g, 0.0, None))
        if not np.any(k > 0):
            return float("inf")
        return float(2.0 * math.pi / (self.grid.ds * k.max()))

    # eigenpairs ---------------------------------------------------------------

    def _lower_bound(self, first: int, start: float) -> float:
        e = min(start, -1.0)
        for _ in range(80):
            if self.max_t(e) >= _T_LIMIT:
                raise _GridRangeError(
                    f"grid step too coarse below E={e:.6g}", e_low=2.0 * e
                )
            if int(self.count(e)[0]) <= first:
                return e
            e *= 2.0
        raise SolverError(f"no lower bracket for state index {first}")

    def _upper_bound(self, last: int) -> float:
        e = self.grid.e_max
        if int(self.count(e)[0]) < last:
            raise _GridRangeError(
                f"grid e_max={e:.6g} below state index {last - 1}", e_high=2.0 * e
            )
        return e

    def _bisect(
        self, targets: np.ndarray, lo: np.ndarray, hi: np.ndarray, width: float
    ) -> tuple[np.ndarray, np.ndarray]:
        for _ in range(200):
            scale = np.maximum(1.0, np.abs(hi))
            if np.all(hi - lo < width * scale):
                break
            mid = 0.5 * (lo + hi)
            above = self.count(mid) > targets
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        return lo, hi

    def _refine(
        self, targets: np.ndarray, lo: np.ndarray, hi: np.ndarray, tol: float
    ) -> np.ndarray:
        """Illinois 할선법 + 계수 기반 bracket 갱신."""
        m = self._turning_index(self._t(0.5 * (lo + hi)))
        d_lo = self.mismatch(lo, m)
        d_hi = self.mismatch(hi, m)
        side = np.zeros(lo.size, dtype=int)
        for it in range(200):
            if np.all(hi - lo < tol):
                break
            valid = np.isfinite(d_lo) & np.isfinite(d_hi) & (d_lo < 0.0) & (d_hi > 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                c = (lo * d_hi - hi * d_lo) / (d_hi - d_lo)
            c = np.where(valid & (it % 4 != 3), c, 0.5 * (lo + hi))
            c = np.clip(c, lo, hi)
            cnt, dc, _ = self._inertia(c, m)
            above = cnt > targets
            lo_stale = above & (side == 1)
            hi_stale = ~above & (side == -1)
            d_lo = np.where(lo_stale, 0.5 * d_lo, d_lo)
            d_hi = np.where(hi_stale, 0.5 * d_hi, d_hi)
            hi = np.where(above, c, hi)
            d_hi = np.where(above, dc, d_hi)
            lo = np.where(above, lo, c)
            d_lo = np.where(above, d_lo, dc)
            side = np.where(above, 1, -1)
        width = hi - lo
        if np.any(width >= tol):
            worst = int(np.argmax(width))
            if width[worst] > 1e3 * tol:
                raise SolverError(
                    f"eigenvalue refinement stalled for state {int(targets[worst])}: "
                    f"bracket [{lo[worst]:.12g}, {hi[worst]:.12g}]"
                )
            warnings.warn(
                f"eigenvalue bracket width {width[worst]:.2e} above {tol:.0e}",
                ConvergenceWarning,
                stacklevel=3,
            )
        return 0.5 * (lo + hi)

    def wavefunctions(self, energies: np.ndarray) -> np.ndarray:
        """고유에너지에서 ψ(x_n) 을 복원 (격자 정규화)."""
        e = np.atleast_1d(np.asarray(energies, dtype=float))
        t = self._t(e)
        _, r_out, r_in = self._ratios(t, e)
        m = self._turning_index(t)
        n1, k = t.shape
        cols = np.arange(k)
        f = np.zeros_like(t)
        f[m, cols] = 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for n in range(n1 - 1, 0, -1):
                mask = n <= m
                if mask.any():
                    f[n - 1, mask] = f[n, mask] / r_out[n - 1, mask]
            for n in range(0, n1 - 1):
                mask = n >= m
                if mask.any():
                    f[n + 1, mask] = f[n, mask] / r_in[n + 1, mask]
        f = np.nan_to_num(f, nan=0.0, posinf=0.0, neginf=0.0)
        psi = (f / (1.0 - t)) * np.sqrt(self.grid.jacobian)[:, None]
        norms = np.sqrt(np.einsum("nk,n,nk->k", psi, self.grid.weights, psi))
        return (psi / norms[None, :]).T

    def eigenvalues(
        self,
        n_states: int,
        *,
        n_bound_keep: int = DEFAULT_N_BOUND_KEEP,
        bound_threshold: float = 0.0,
        tol: float = ENERGY_TOL,
        first: Optional[int] = None,
    ) -> tuple[np.ndarray, int, int]:
        """(고유값, 첫 상태 번호, bound_threshold 아래 상태 수).

        first 를 주면 그 번호부터 n_states 개를 풉니다 (외삽 단계끼리 같은 상태).
        """
        if n_states < 1:
            raise DomainError(f"n_states must be >= 1, got {n_states!r}")
        n_below = int(self.count(bound_threshold)[0])
        if first is None:
            first = max(0, n_below - max(0, int(n_bound_keep)))
        last = first + int(n_states)
        e_lo = self._lower_bound(first, bound_threshold)
        e_hi = self._upper_bound(last)
        sampled = self.min_points_per_wavelength(e_hi)
        if sampled < 0.5 * self.grid.points_per_wavelength * self.grid.refinement:
            raise PreconditionError(
                f"grid undersamples E={e_hi:.6g}: {sampled:.1f} points per wavelength"
            )

        targets = np.arange(first, last)
        lo = np.full(targets.size, e_lo)
        hi = np.full(targets.size, e_hi)
        lo, hi = self._bisect(targets, lo, hi, 1e-7)
        energies = self._refine(targets, lo, hi, tol)

        gaps = np.diff(energies)
        if np.any(gaps <= RESOLVE_TOL):
            warnings.warn(
                f"unresolved near-degenerate roots in block {self.describe()}",
                ConvergenceWarning,
                stacklevel=2,
            )
        return energies, first, n_below

    def solve(
        self,
        n_states: int,
        *,
        n_bound_keep: int = DEFAULT_N_BOUND_KEEP,
        bound_threshold: float = 0.0,
        tol: float = ENERGY_TOL,
    ) -> _BlockSolution:
        energies, first, n_below = self.eigenvalues(
            n_states, n_bound_keep=n_bound_keep, bound_threshold=bound_threshold, tol=tol
        )
        psi = _lowdin(self.wavefunctions(energies), self.grid.weights)
        logger.debug(
            "%s: %d states in [%.6g, %.6g], %d bound kept",
            self.describe(),
            energies.size,
            energies[0],
            energies[-1],
            n_below - first,
        )
        return _BlockSolution(
            energies=energies, wavefunctions=psi, n_bound=max(0, n_below - first), first=first
        )

    def describe(self) -> str:
        if self.kind == "3d":
            return f"l={self.l}"
        return "even" if self.parity > 0 else "odd"


def _lowdin(psi: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """대칭 직교화: S^{-1/2} ψ."""
    overlap = (psi * weights[None, :]) @ psi.T
    overlap = 0.5 * (overlap + overlap.T)
    drift = float(np.abs(overlap - np.eye(overlap.shape[0])).max())
    if drift > 1e-4:
        warnings.warn(
            f"eigenfunction overlap drift {drift:.2e} before orthonormalization",
            ConvergenceWarning,
            stacklevel=3,
        )
    vals, vecs = np.linalg.eigh(overlap)
    inv_sqrt = (vecs / np.sqrt(vals)[None, :]) @ vecs.T
    return inv_sqrt @ psi


def richardson_extrapolate(
    table: Sequence[np.ndarray], order: int = 4
) -> tuple[np.ndarray, np.ndarray]:
    """간격을 반씩 줄인 격자들의 값 (성긴 것부터) 을 Romberg 외삽.

    오차 급수 h^order, h^(order+2), ... 를 차례로 지웁니다. 두 번째 값은 마지막
    보정의 크기로, 외삽 직전 추정값의 오차 추정치입니다.
    """
    row = [np.asarray(v, dtype=float) for v in table]
    if not row:
        raise PreconditionError("nothing to extrapolate")
    correction = np.zeros_like(row[-1])
    p = int(order)
    while len(row) > 1:
        factor = 2.0**p - 1.0
        nxt = [fine + (fine - coarse) / factor for coarse, fine in zip(row[:-1], row[1:])]
        correction = np.abs(nxt[-1] - row[-1])
        row = nxt
        p += 2
    return row[0], correction


def _solve_chain(
    chain: Sequence[RadialProblem], n_states: int, n_bound_keep: int
) -> _BlockSolution:
    """가장 고운 격자에서 고유쌍을 구하고, 성긴 단계 고유값과 함께 외삽."""
    finest = chain[-1].solve(n_states, n_bound_keep=n_bound_keep)
    if len(chain) == 1:
        return finest
    table = [p.eigenvalues(n_states, first=finest.first)[0] for p in chain[:-1]]
    table.append(finest.energies)
    energies, correction = richardson_extrapolate(table)
    limit = REFINE_TOL * np.maximum(1.0, np.abs(energies))
    worst = int(np.argmax(correction / limit))
    logger.debug(
        "%s: extrapolated over %d grids, largest correction %.2e",
        chain[-1].describe(),
        len(chain),
        float(correction.max()),
    )
    if correction[worst] > limit[worst]:
        warnings.warn(
            f"grid refinement moves state {finest.first + worst} of block "
            f"{chain[-1].describe()} by {correction[worst]:.2e}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return _BlockSolution(
        energies=energies,
        wavefunctions=finest.wavefunctions,
        n_bound=finest.n_bound,
        first=finest.first,
    )


def _solve_blocks(
    make_grid: Callable[[float, float], RadialGrid],
    make_problems: Callable[[RadialGrid], list[RadialProblem]],
    e_max: float,
    *,
    auto_grid: bool,
    n_states: int,
    n_bound_keep: int,
    threads: Optional[int] = None,
) -> tuple[RadialGrid, list[_BlockSolution]]:
    e_min = 0.0
    for attempt in range(8):
        grid = make_grid(e_max, e_min)
        chains = list(zip(*(make_problems(g) for g in grid.levels())))
        try:
            solutions = parallel_map(
                lambda chain: _solve_chain(chain, n_states, n_bound_keep),
                chains,
                threads,
            )
            return grid, solutions
        except _GridRangeError as err:
            if not auto_grid:
                raise PreconditionError(str(err)) from err
            e_max = max(e_max, err.e_high)
            e_min = min(e_min, err.e_low)
            logger.info(
                "rebuilding grid (attempt %d): e_max=%.4g, e_min=%.4g",
                attempt + 1,
                e_max,
                e_min,
            )
    raise PreconditionError("could not build a grid covering the requested states")


def _cached(
    cache: Optional[ArrayCache],
    payload: dict[str, Any],
    compute: Callable[[], dict[str, np.ndarray]],
) -> dict[str, np.ndarray]:
    if cache is None:
        return compute()
    return cache.get_or_compute(content_hash(payload), compute)


def solve_1d(
    phases: ShortRangePhases,
    mass_factor: float,
    omega: float,
    grid: Optional[RadialGrid] = None,
    n_states: int = 20,
    *,
    interacting: bool = True,
    n_bound_keep: int = DEFAULT_N_BOUND_KEEP,
    points_per_wavelength: float = DEFAULT_PPW,
    dominance: float = DEFAULT_DOMINANCE,
    cache: Optional[ArrayCache] = None,
    threads: Optional[int] = None,
) -> tuple[RadialBasis, RadialBasis]:
    """짝/홀 parity 별 최저 n_states 고유쌍.

    고유함수는 grid (가장 고운 외삽 단계) 위에 있고, 에너지는 grid.levels() 의
    고유값을 Romberg 외삽한 값입니다.
    """
    xi = _positive("mass_factor", mass_factor)
    om = _positive("omega", omega)
    payload = {
        "op": "solve_1d",
        "phases": [phases.phi_even, phases.phi_odd],
        "mass_factor": xi,
        "omega": om,
        "n_states": int(n_states),
        "interacting": bool(interacting),
        "n_bound_keep": int(n_bound_keep),
        "ppw": float(points_per_wavelength),
        "dominance": float(dominance),
        "refinement": DEFAULT_REFINEMENT,
        "grid": grid.params() if grid is not None else None,
    }

    def make_grid(e_max: float, e_min: float) -> RadialGrid:
        if grid is not None:
            return grid
        return build_grid(
            xi,
            om,
            e_max,
            interacting=interacting,
            e_min=e_min,
            points_per_wavelength=points_per_wavelength,
            dominance=dominance,
        )

    def make_problems(g: RadialGrid) -> list[RadialProblem]:
        return [
            RadialProblem(
                g,
                xi,
                om,
                kind="1d",
                parity=parity,
                phase=phases.for_parity(parity),
                interacting=interacting,
            )
            for parity in (1, -1)
        ]

    def compute() -> dict[str, np.ndarray]:
        g, (even, odd) = _solve_blocks(
            make_grid,
            make_problems,
            (2.0 * n_states + 4.0) * om,
            auto_grid=grid is None,
            n_states=int(n_states),
            n_bound_keep=int(n_bound_keep),
            threads=threads,
        )
        return {
            "grid": g.to_array(),
            "even_energies": even.energies,
            "even_psi": even.wavefunctions,
            "odd_energies": odd.energies,
            "odd_psi": odd.wavefunctions,
            "n_bound": np.array([even.n_bound, odd.n_bound]),
        }

    data = _cached(cache, payload, compute)
    g = grid if grid is not None else RadialGrid.from_array(data["grid"])
    out = []
    for idx, (parity, name) in enumerate(((1, "even"), (-1, "odd"))):
        energies = np.asarray(data[f"{name}_energies"])
        n = energies.size
        out.append(
            RadialBasis(
                label=name,
                kind="1d",
                energies=energies,
                wavefunctions=np.asarray(data[f"{name}_psi"]),
                grid=g,
                parity=np.full(n, parity, dtype=int),
                l=np.full(n, 0 if parity > 0 else 1, dtype=int),
                mass_factor=xi,
                omega=om,
                phase=np.full(n, phases.for_parity(parity)),
                interacting=interacting,
                n_bound=int(data["n_bound"][idx]),
            )
        )
    logger.info(
        "solve_1d: ξ=%.4g ω=%.4g, %d+%d states on %d points",
        xi,
        om,
        out[0].size,
        out[1].size,
        g.n_points,
    )
    return out[0], out[1]


def solve_radial_3d(
    phi: float,
    l: int,
    mass_factor: float,
    omega_perp: float,
    grid: Optional[RadialGrid] = None,
    n_states: int = 20,
    *,
    interacting: bool = True,
    n_bound_keep: int = DEFAULT_N_BOUND_KEEP,
    points_per_wavelength: float = DEFAULT_PPW,
    dominance: float = DEFAULT_DOMINANCE,
    cache: Optional[ArrayCache] = None,
) -> RadialBasis:
    """부분파 l 의 반지름 방정식 최저 n_states 해."""
    return solve_radial_3d_set(
        phi,
        [l],
        mass_factor,
        omega_perp,
        grid,
        n_states,
        interacting=interacting,
        n_bound_keep=n_bound_keep,
        points_per_wavelength=points_per_wavelength,
        dominance=dominance,
        cache=cache,
        threads=1,
    )[0]


def solve_radial_3d_set(
    phi: float,
    l_values: Sequence[int],
    mass_factor: float,
    omega_perp: float,
    grid: Optional[RadialGrid] = None,
    n_states: int = 20,
    *,
    interacting: bool = True,
    n_bound_keep: int = DEFAULT_N_BOUND_KEEP,
    points_per_wavelength: float = DEFAULT_PPW,
    dominance: float = DEFAULT_DOMINANCE,
    cache: Optional[ArrayCache] = None,
    threads: Optional[int] = None,
) -> list[RadialBasis]:
    """여러 부분파를 하나의 격자에서 (병렬로) 풉니다."""
    ls = [int(l) for l in l_values]
    if not ls or min(ls) < 0:
        raise DomainError(f"partial waves must be >= 0, got {ls!r}")
    xi = _positive("mass_factor", mass_factor)
    om = _positive("omega_perp", omega_perp)
    payload = {
        "op": "solve_radial_3d",
        "phi": float(phi),
        "l": ls,
        "mass_factor": xi,
        "omega": om,
        "n_states": int(n_states),
        "interacting": bool(interacting),
        "n_bound_keep": int(n_bound_keep),
        "ppw": float(points_per_wavelength),
        "dominance": float(dominance),
        "refinement": DEFAULT_REFINEMENT,
        "grid": grid.params() if grid is not None else None,
    }

    def make_grid(e_max: float, e_min: float) -> RadialGrid:
        if grid is not None:
            return grid
        return build_grid(
            xi,
            om,
            e_max,
            kind="3d",
            interacting=interacting,
            e_min=e_min,
            points_per_wavelength=points_per_wavelength,
            dominance=dominance,
        )

    def make_problems(g: RadialGrid) -> list[RadialProblem]:
        return [
            RadialProblem(g, xi, om, kind="3d", l=l, phase=phi, interacting=interacting)
            for l in ls
        ]

    def compute() -> dict[str, np.ndarray]:
        g, blocks = _solve_blocks(
            make_grid,
            make_problems,
            (2.0 * n_states + max(ls) + 4.0) * om,
            auto_grid=grid is None,
            n_states=int(n_states),
            n_bound_keep=int(n_bound_keep),
            threads=threads,
        )
        data: dict[str, np.ndarray] = {"grid": g.to_array()}
        for l, block in zip(ls, blocks):
            data[f"l{l}_energies"] = block.energies
            data[f"l{l}_psi"] = block.wavefunctions
            data[f"l{l}_n_bound"] = np.array([block.n_bound])
        return data

    data = _cached(cache, payload, compute)
    g = grid if grid is not None else RadialGrid.from_array(data["grid"])
    out = []
    for l in ls:
        energies = np.asarray(data[f"l{l}_energies"])
        n = energies.size
        out.append(
            RadialBasis(
                label=f"l={l}",
                kind="3d",
                energies=energies,
                wavefunctions=np.asarray(data[f"l{l}_psi"]),
                grid=g,
                parity=np.full(n, (-1) ** l, dtype=int),
                l=np.full(n, l, dtype=int),
                mass_factor=xi,
                omega=om,
                phase=np.full(n, float(phi)),
                interacting=interacting,
                n_bound=int(data[f"l{l}_n_bound"][0]),
            )
        )
    logger.info(
        "solve_radial_3d: l=%s, %d states each on %d points", ls, n_states, g.n_points
    )
    return out
