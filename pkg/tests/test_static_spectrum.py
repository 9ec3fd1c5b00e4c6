from __future__ import annotations

import math

import numpy as np
import pytest

from atomion_dw.core.errors import DomainError
from atomion_dw.physics.qdt_numerov import ShortRangePhases, merge_parities, solve_1d
from atomion_dw.physics.static_spectrum import (
    DoubleWellConfig,
    StaticModel,
    build_static_hamiltonian,
    clebsch_coeff,
    ground_pair_tracks,
    static_spectrum_3d,
    static_spectrum_sweep,
    tunnelling_rate,
)


@pytest.fixture(scope="module")
def free_model() -> StaticModel:
    # ξ = 1 → m = 1/2, ω_a = 1, C4 없음
    even, odd = solve_1d(ShortRangePhases(), 1.0, 1.0, n_states=30, interacting=False)
    return StaticModel(merge_parities(even, odd))


def test_double_well_potential_shape():
    cfg = DoubleWellConfig(d=2.0, omega_a=1.5, m_a=0.7)
    assert cfg.potential(np.array([-2.0, 2.0])) == pytest.approx([0.0, 0.0], abs=1e-14)
    assert float(cfg.potential(np.array([0.0]))[0]) == pytest.approx(cfg.barrier)
    # 각 우물 바닥의 곡률은 단일 트랩과 같음
    assert cfg.curvature(2.0) == pytest.approx(0.7 * 1.5**2, rel=1e-5)


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_non_positive_separation_rejected(free_model, d):
    with pytest.raises(DomainError):
        DoubleWellConfig(d=d, omega_a=1.0, m_a=1.0)
    with pytest.raises(DomainError):
        build_static_hamiltonian(free_model.basis, d)


def test_matches_finite_difference_double_well(free_model, double_well_fd):
    d = 2.5
    energies = free_model.diagonalize(d, 4)[0]
    reference = double_well_fd(0.5, 1.0, d, 4)
    np.testing.assert_allclose(energies, reference, rtol=0.0, atol=1e-6)


def test_parametric_parts_rebuild_hamiltonian(free_model):
    fixed, z4, pref = free_model.parametric_parts()
    for d in (1.0, 2.5):
        rebuilt = fixed + pref * z4 / (8.0 * d * d)
        rebuilt[np.diag_indices_from(rebuilt)] += pref * d * d / 8.0
        np.testing.assert_allclose(rebuilt, free_model.hamiltonian(d), atol=1e-12)


def test_ground_pair_and_tunnelling_rate(free_model):
    sweep = static_spectrum_sweep(free_model, [2.0, 3.0, 2.5], n_levels=6, threads=1)
    assert list(sweep.d_values) == [3.0, 2.5, 2.0]
    assert sweep.labels[:2] == ["|0>+", "|0>-"]
    table = tunnelling_rate(sweep, ground_pair_tracks(sweep))
    assert table.valid.all()
    assert np.all(table.j > 0.0)
    # 장벽이 낮아질수록 J 증가
    assert np.all(np.diff(table.j) > 0.0)


def test_localized_pair_sits_in_opposite_wells(free_model):
    e, v, parity = free_model.diagonalize(3.0, 2)
    assert list(parity) == [1, -1]
    assert free_model.right_probability(v[:, 0]) == pytest.approx(0.5, abs=1e-8)
    left, right = free_model.localized_pair(v[:, 0], v[:, 1])
    p_left = free_model.right_probability(left)
    p_right = free_model.right_probability(right)
    assert p_left < 0.5 < p_right
    assert p_left + p_right == pytest.approx(1.0, abs=1e-8)
    assert float(left @ right) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "l, lp, j, expected",
    [
        (0, 0, 2, 1.0 / 3.0),
        (1, 1, 2, 3.0 / 5.0),
        (0, 2, 2, 2.0 * math.sqrt(5.0) / 15.0),
        (0, 0, 4, 1.0 / 5.0),
        (1, 1, 4, 3.0 / 7.0),
        (0, 2, 4, 4.0 * math.sqrt(5.0) / 35.0),
        (0, 4, 4, 72.0 / 945.0),
        (0, 1, 2, 0.0),
        (0, 6, 4, 0.0),
    ],
)
def test_clebsch_known_values(l, lp, j, expected):
    assert clebsch_coeff(l, lp, j) == pytest.approx(expected, abs=1e-14)
    assert clebsch_coeff(lp, l, j) == pytest.approx(expected, abs=1e-14)


def test_clebsch_matches_quadrature():
    from scipy import special

    x, w = np.polynomial.legendre.leggauss(40)
    for j in (2, 4):
        for l in range(7):
            for lp in range(7):
                norm = 0.5 * math.sqrt((2 * l + 1) * (2 * lp + 1))
                value = norm * np.sum(
                    w * x**j * special.eval_legendre(l, x) * special.eval_legendre(lp, x)
                )
                assert clebsch_coeff(l, lp, j) == pytest.approx(value, abs=1e-12)


def test_clebsch_order_is_restricted():
    with pytest.raises(DomainError):
        clebsch_coeff(0, 0, 3)


def test_three_dimensional_separable_limit(double_well_fd):
    # C4 없이 ω_⊥ = ω_a 이면 가로 방향 바닥 에너지 ω_⊥ 만큼 이동
    sweep = static_spectrum_3d(
        0.0,
        1.0,
        1.0,
        [1.5],
        l_max=14,
        n_max=10,
        mass_factor=1.0,
        interacting=False,
        n_levels=4,
        threads=1,
    )
    reference = 1.0 + double_well_fd(0.5, 1.0, 1.5, 2)
    np.testing.assert_allclose(sweep.energies[0][:2], reference, atol=2e-3)
