from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special
from scipy.linalg import eigh_tridiagonal

from atomion_dw.core.cache import clear_memory_cache
from atomion_dw.physics.qdt_numerov import RadialGrid, ShortRangePhases
from atomion_dw.physics.species_units import SpeciesPair
from atomion_dw.physics.twobody_spectrum import (
    TwoBodyConfig,
    TwoBodyModel,
    build_product_basis,
)

RB_POLARIZABILITY_AU = 319.0
LI_POLARIZABILITY_AU = 164.0


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    # 테스트마다 캐시/스레드 설정을 고정합니다.
    monkeypatch.setenv("ATOMION_THREADS", "1")
    monkeypatch.setenv("ATOMION_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.delenv("ATOMION_TIER", raising=False)
    monkeypatch.delenv("DEBUG_ERRORS", raising=False)
    clear_memory_cache()
    yield
    clear_memory_cache()


@pytest.fixture
def rb_yb() -> SpeciesPair:
    return SpeciesPair.from_names("Rb87", "Yb171+", polarizability_au=RB_POLARIZABILITY_AU)


@pytest.fixture
def li_yb() -> SpeciesPair:
    return SpeciesPair.from_names("Li7", "Yb171+", polarizability_au=LI_POLARIZABILITY_AU)


@pytest.fixture(scope="session")
def free_two_body() -> TwoBodyModel:
    """C4 없는 같은 질량 2체 모형: 이온 ω_i = 2, 원자 ω_a = 1."""
    cfg = TwoBodyConfig(
        m_a=1.0,
        m_i=1.0,
        omega_a=1.0,
        omega_i=2.0,
        phases=ShortRangePhases(),
        n_com=24,
        n_rel=24,
        interacting=False,
        points_per_wavelength=40.0,
    )
    return TwoBodyModel(build_product_basis(cfg, threads=1))


def _richardson_h2(levels: list[np.ndarray]) -> np.ndarray:
    """간격을 반씩 줄인 3점 차분 고유값들에서 h², h⁴ 오차를 제거."""
    r1 = [(4.0 * fine - coarse) / 3.0 for coarse, fine in zip(levels[:-1], levels[1:])]
    if len(r1) == 1:
        return r1[0]
    return (16.0 * r1[1] - r1[0]) / 15.0


def _double_well_fd(m: float, omega: float, d: float, n_levels: int) -> np.ndarray:
    """-(1/2m) ψ'' + V_dw ψ 의 3점 차분 고유값, 세 격자 Richardson 외삽."""
    half = d + 12.0 / math.sqrt(m * omega)
    b = m * omega**2 * d**2 / 8.0
    levels = []
    for n in (3001, 6001, 12001):
        z = np.linspace(-half, half, n)
        h = z[1] - z[0]
        v = b / d**4 * (z**2 - d**2) ** 2
        diag = 1.0 / (m * h * h) + v
        off = np.full(z.size - 1, -0.5 / (m * h * h))
        levels.append(eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))[0])
    return _richardson_h2(levels)


@pytest.fixture
def double_well_fd():
    return _double_well_fd


def _qdt_log_derivative(x: float, xi: float, phase: float, kind: str, l: int) -> float:
    """경계 함수 ψ_bc 의 ψ'/ψ (1D: x sin(ξ/x + φ), 3D: √x [J + tanδ Y](ξ/x))."""
    if kind == "1d":
        return 1.0 / x - xi / x**2 / math.tan(xi / x + phase)
    nu = l + 0.5
    tan_delta = math.tan(-phase - 0.5 * l * math.pi)
    z = xi / x
    c = special.jv(nu, z) + tan_delta * special.yv(nu, z)
    dc = special.jvp(nu, z) + tan_delta * special.yvp(nu, z)
    return 0.5 / x - xi / x**2 * dc / c


def _radial_fd(
    grid: RadialGrid,
    xi: float,
    omega: float,
    e_ceiling: float,
    n_levels: int,
    *,
    kind: str = "1d",
    l: int = 0,
    phase: float = 0.0,
    factors: tuple[int, ...] = (4, 8, 16),
) -> np.ndarray:
    """같은 s-격자 계열 위 3점 차분 (x_min 에서 ψ_bc 의 로그 미분 경계).

    e_ceiling 아래 고유값 중 가장 높은 n_levels 개를 Richardson 외삽합니다.
    """
    centrifugal = l * (l + 1) if kind == "3d" else 0
    levels = []
    for f in factors:
        fd = RadialGrid(
            x_min=grid.x_min,
            x_max=grid.x_max,
            x_c=grid.x_c,
            n_intervals=f * grid.n_intervals,
            e_max=grid.e_max,
        )
        x, d1, ds = fd.x, fd.jacobian, fd.ds
        g0 = xi**2 * (0.25 * xi**2 * omega**2 * x**2 - 1.0 / x**4) + centrifugal / x**2
        q = d1**2 * g0 + fd.liouville
        w = xi**2 * d1**2
        # φ = ψ/√x' 의 로그 미분, x''/x' = x_c²/(x + x_c)²
        kappa = d1[0] * _qdt_log_derivative(x[0], xi, phase, kind, l) - 0.5 * (
            grid.x_c / (x[0] + grid.x_c)
        ) ** 2
        a = 2.0 / ds**2 + q[:-1]
        a[0] = (1.0 + ds * kappa) / ds**2 + 0.5 * q[0]
        b = w[:-1].copy()
        b[0] *= 0.5
        diag = a / b
        off = -1.0 / ds**2 / np.sqrt(b[:-1] * b[1:])
        floor = float((diag - 2.0 * np.abs(off).max()).min()) - 1.0
        values = eigh_tridiagonal(diag, off, select="v", select_range=(floor, e_ceiling))[0]
        levels.append(values[-n_levels:])
    return _richardson_h2(levels)


@pytest.fixture
def radial_fd():
    return _radial_fd
