from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from atomion_dw.core.cache import ArrayCache
from atomion_dw.core.errors import ConvergenceWarning, DomainError, PreconditionError
from atomion_dw.physics.qdt_numerov import (
    RadialProblem,
    ShortRangePhases,
    build_grid,
    merge_parities,
    moments,
    node_counts,
    richardson_extrapolate,
    solve_1d,
    solve_radial_3d,
)
from atomion_dw.physics.species_units import UnitSystem

PAIR_PHASES = ShortRangePhases(-math.pi / 4, math.pi / 4)


@pytest.fixture(scope="module")
def ho_basis():
    even, odd = solve_1d(ShortRangePhases(), 1.0, 1.0, n_states=8, interacting=False)
    return merge_parities(even, odd)


@pytest.fixture(scope="module")
def interacting_pair():
    return solve_1d(PAIR_PHASES, 1.0, 2.0, n_states=6)


def _d_ds(values: np.ndarray, ds: float) -> np.ndarray:
    """균일 s-격자 위 4차 정확도 미분 (행마다)."""
    f = np.atleast_2d(values)
    out = np.empty_like(f)
    inner = f[:, :-4] - 8.0 * f[:, 1:-3] + 8.0 * f[:, 3:-1] - f[:, 4:]
    out[:, 2:-2] = inner / (12.0 * ds)
    head = f[:, :5]
    out[:, 0] = head @ np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * ds)
    out[:, 1] = head @ np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12.0 * ds)
    tail = f[:, -5:]
    out[:, -1] = tail @ np.array([3.0, -16.0, 36.0, -48.0, 25.0]) / (12.0 * ds)
    out[:, -2] = tail @ np.array([-1.0, 6.0, -18.0, 10.0, 3.0]) / (12.0 * ds)
    return out


def _dilation_elements(basis) -> np.ndarray:
    """반직선 A_ab = ∫ ψ_a (2x ψ_b' + ψ_b) dx, ⟨a|{x,p}|b⟩ = -i A_ab."""
    grid = basis.grid
    psi = basis.wavefunctions
    dpsi = _d_ds(psi, grid.ds) / grid.jacobian[None, :]
    integrand = 2.0 * grid.x[None, :] * dpsi + psi
    return (psi * grid.weights[None, :]) @ integrand.T


def test_harmonic_limit_1d(ho_basis):
    exact = np.arange(ho_basis.size) + 0.5
    np.testing.assert_allclose(ho_basis.energies, exact, rtol=1e-8)
    assert list(ho_basis.parity[:4]) == [1, -1, 1, -1]


def test_harmonic_limit_3d():
    for l in (0, 1, 2):
        basis = solve_radial_3d(0.0, l, 1.0, 1.0, n_states=5, interacting=False)
        exact = 2.0 * np.arange(5) + l + 1.5
        np.testing.assert_allclose(basis.energies, exact, rtol=1e-8)


def test_free_grids_start_where_the_boundary_is():
    line = build_grid(1.0, 1.0, 20.0, interacting=False)
    assert line.mapping == "linear" and line.x[0] == 0.0
    radial = build_grid(1.0, 1.0, 20.0, kind="3d", interacting=False)
    assert radial.mapping == "log" and radial.x[0] > 0.0
    coarse, middle, fine = radial.levels()
    assert fine is radial and coarse.refinement == 1
    np.testing.assert_allclose(coarse.s, fine.s[::4], rtol=0.0, atol=1e-12)
    np.testing.assert_allclose(middle.x, fine.x[::2], rtol=1e-12)
    with pytest.raises(PreconditionError):
        RadialProblem(line, 1.0, 1.0, interacting=True)


def test_basis_is_orthonormal(ho_basis, interacting_pair):
    np.testing.assert_allclose(ho_basis.gram(), np.eye(ho_basis.size), atol=1e-10)
    for block in interacting_pair:
        np.testing.assert_allclose(block.gram(), np.eye(block.size), atol=1e-10)


def test_position_moments_match_oscillator(ho_basis):
    # m = 1/2, ω = 1: ⟨n|x²|n⟩ = (n+½)/(mω) = 2n+1, |⟨0|x|1⟩| = 1
    m2 = ho_basis.moment(2)
    exact = 2.0 * np.arange(ho_basis.size) + 1.0
    np.testing.assert_allclose(np.diag(m2), exact, rtol=1e-6)
    assert abs(ho_basis.moment(1)[0, 1]) == pytest.approx(1.0, rel=1e-6)
    assert abs(m2[0, 2]) == pytest.approx(math.sqrt(2.0), rel=1e-6)


def test_odd_moments_vanish_between_equal_parities(ho_basis):
    m1 = ho_basis.moment(1)
    same = np.equal.outer(ho_basis.parity, ho_basis.parity)
    assert np.abs(m1[same]).max() <= 1e-10
    m2 = ho_basis.moment(2)
    assert np.abs(m2[~same]).max() <= 1e-10


def test_moment_order_is_limited(ho_basis):
    with pytest.raises(DomainError):
        moments(ho_basis, ho_basis, 5)


def test_fourth_moment_against_simpson(interacting_pair):
    even, _ = interacting_pair
    m4 = even.moment(4)
    np.testing.assert_allclose(m4, m4.T, atol=1e-14)
    assert np.all(np.diag(m4) > 0.0)
    grid = even.grid
    a, b = even.n_bound, even.n_bound + 1
    product = even.wavefunctions[a] * even.wavefunctions[b] * grid.x**4 * grid.jacobian
    reference = integrate.simpson(product, x=grid.s)
    assert m4[a, b] == pytest.approx(reference, abs=1e-6 * np.abs(m4).max())


def test_sturm_count_matches_oscillator_levels():
    grid = build_grid(1.0, 1.0, 20.0, interacting=False)
    problem = RadialProblem(grid, 1.0, 1.0, kind="1d", parity=1, interacting=False)
    # 짝 준위 0.5, 2.5, 4.5, ...
    assert list(problem.count([0.3, 1.0, 2.6, 4.6])) == [0, 1, 2, 3]
    odd = RadialProblem(grid, 1.0, 1.0, kind="1d", parity=-1, interacting=False)
    assert list(odd.count([1.4, 1.6, 3.6])) == [0, 1, 2]


def test_interacting_spectrum_is_ordered(interacting_pair):
    even, odd = interacting_pair
    for block in (even, odd):
        assert np.all(np.diff(block.energies) > 1e-9)
        assert block.n_bound <= 2
        assert np.all(block.energies[: block.n_bound] < 0.0)
        assert np.all(block.energies[block.n_bound :] > 0.0)


def test_count_equals_outward_sign_changes(interacting_pair):
    for block, parity in zip(interacting_pair, (1, -1)):
        problem = RadialProblem(
            block.grid, 1.0, 2.0, parity=parity, phase=PAIR_PHASES.for_parity(parity)
        )
        energies = np.linspace(block.energies[0] - 5.0, block.energies[-1] + 1.0, 41)
        np.testing.assert_array_equal(
            problem.count(energies), problem.outward_node_count(energies)
        )
    basis = solve_radial_3d(math.pi / 4, 0, 1.0, 2.0, n_states=4)
    for l in (0, 1, 2):
        problem = RadialProblem(basis.grid, 1.0, 2.0, kind="3d", l=l, phase=math.pi / 4)
        energies = np.linspace(basis.energies[0] - 5.0, basis.energies[-1], 31)
        np.testing.assert_array_equal(
            problem.count(energies), problem.outward_node_count(energies)
        )


def test_trap_state_nodes_increase_one_by_one(interacting_pair):
    for block, parity in zip(interacting_pair, (1, -1)):
        trap = block.subset(range(block.n_bound, block.size))
        nodes = node_counts(trap)
        np.testing.assert_array_equal(np.diff(nodes), 1)
        outer = node_counts(trap, block.grid.x_qdt)
        assert np.all(np.diff(outer) >= 0) and outer[-1] > outer[0]

        problem = RadialProblem(
            block.grid, 1.0, 2.0, parity=parity, phase=PAIR_PHASES.for_parity(parity)
        )
        between = 0.5 * (trap.energies[:-1] + trap.energies[1:])
        np.testing.assert_array_equal(problem.count(between), nodes[:-1] + 1)
        outward = problem.outward_node_count(between)
        np.testing.assert_array_equal(outward, nodes[:-1] + 1)


def test_phases_are_pi_periodic(interacting_pair):
    even, odd = interacting_pair
    even2, odd2 = solve_1d(PAIR_PHASES.shifted(1), 1.0, 2.0, n_states=6, grid=even.grid)
    np.testing.assert_allclose(even2.energies, even.energies, rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(odd2.energies, odd.energies, rtol=1e-12, atol=1e-9)


def test_spectrum_is_continuous_in_phase(interacting_pair):
    nudged = ShortRangePhases(PAIR_PHASES.phi_even + 1e-4, PAIR_PHASES.phi_odd + 1e-4)
    for before, after in zip(interacting_pair, solve_1d(nudged, 1.0, 2.0, n_states=6)):
        assert after.n_bound == before.n_bound
        trap = slice(before.n_bound, None)
        assert np.abs(after.energies[trap] - before.energies[trap]).max() < 1e-2


def test_halving_steps_keeps_energies(interacting_pair):
    finer_grid = interacting_pair[0].grid.refined(2)
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        finer = solve_1d(PAIR_PHASES, 1.0, 2.0, n_states=6, grid=finer_grid)
    for coarse, fine in zip(interacting_pair, finer):
        limit = 1e-7 * np.maximum(1.0, np.abs(coarse.energies))
        assert np.all(np.abs(fine.energies - coarse.energies) < limit)


def test_richardson_removes_even_error_terms():
    h = np.array([1.0, 0.5, 0.25]) * 0.3
    exact = np.array([1.25, -40.0])
    table = [exact + 0.7 * hh**4 - 2.0 * hh**6 for hh in h]
    estimate, correction = richardson_extrapolate(table)
    np.testing.assert_allclose(estimate, exact, rtol=0.0, atol=1e-12)
    first_pass = table[2] + (table[2] - table[1]) / 15.0
    np.testing.assert_allclose(correction, np.abs(estimate - first_pass), atol=1e-15)


def test_matches_finite_difference_with_same_boundary(interacting_pair, radial_fd):
    for block, parity in zip(interacting_pair, (1, -1)):
        reference = radial_fd(
            block.grid,
            1.0,
            2.0,
            block.energies[-1] + 1.0,
            block.size,
            phase=PAIR_PHASES.for_parity(parity),
        )
        limit = 1e-6 * np.maximum(1.0, np.abs(reference))
        assert np.all(np.abs(block.energies - reference) < limit)


def test_radial_matches_finite_difference(rb_yb, radial_fd):
    xi = rb_yb.atom_mass_factor
    omega_perp = UnitSystem.for_pair(rb_yb).angular_frequency(4.5e3)
    for l in (0, 1):
        basis = solve_radial_3d(math.pi / 4, l, xi, omega_perp, n_states=4)
        assert basis.n_bound >= 1
        assert np.all(basis.energies[: basis.n_bound] < 0.0)
        reference = radial_fd(
            basis.grid,
            xi,
            omega_perp,
            basis.energies[-1] + 0.5 * omega_perp,
            basis.size,
            kind="3d",
            l=l,
            phase=math.pi / 4,
        )
        limit = 1e-6 * np.maximum(1.0, np.abs(reference))
        assert np.all(np.abs(basis.energies - reference) < limit)


def test_pole_branch_is_finite_and_quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        basis = solve_radial_3d(-math.pi / 2, 0, 1.0, 2.0, n_states=4)
    assert np.all(np.isfinite(basis.energies))
    assert np.all(np.isfinite(basis.wavefunctions))
    np.testing.assert_allclose(basis.gram(), np.eye(basis.size), atol=1e-10)


def test_dilation_elements_follow_commutator(ho_basis, interacting_pair):
    # [H, x²] = -(i/m){x, p}, x_min 경계항 포함:
    # A_ab = -m (E_a - E_b) ⟨a|x²|b⟩ - x_min ψ_a(x_min) ψ_b(x_min)
    low = ho_basis.subset(range(10))
    m = 0.5 * low.mass_factor**2
    same = np.equal.outer(low.parity, low.parity)
    expected = -m * np.subtract.outer(low.energies, low.energies) * low.moment(2)
    residual = np.where(same, _dilation_elements(low) - expected, 0.0)
    assert np.abs(residual).max() <= 1e-4 * np.abs(expected).max()

    even, _ = interacting_pair
    m = 0.5 * even.mass_factor**2
    edge = even.wavefunctions[:, 0]
    expected = -m * np.subtract.outer(even.energies, even.energies) * even.moment(2)
    expected -= even.grid.x_min * np.outer(edge, edge)
    residual = _dilation_elements(even) - expected
    assert np.abs(residual).max() <= 1e-4 * np.abs(expected).max()


def test_cache_returns_stored_arrays(tmp_path):
    cache = ArrayCache(tmp_path)
    args = (ShortRangePhases(), 1.0, 1.0)
    first, _ = solve_1d(*args, n_states=4, interacting=False, cache=cache)
    second, _ = solve_1d(*args, n_states=4, interacting=False, cache=cache)
    assert cache.misses == 1 and cache.hits == 1
    np.testing.assert_array_equal(first.energies, second.energies)
    assert second.grid.same_as(first.grid)
    assert list(tmp_path.glob("*.npz"))


def test_invalid_trap_frequency_rejected():
    with pytest.raises(DomainError):
        solve_1d(ShortRangePhases(), 1.0, 0.0, n_states=4)
