from __future__ import annotations

import math

import numpy as np
import pytest

from atomion_dw.core.errors import DomainError, PreconditionError
from atomion_dw.physics.floquet_micromotion import (
    EigenMoments,
    FloquetBasis,
    PaulTrapParams,
    brillouin_reduce,
    build_floquet_hamiltonian,
    com_selection_rule_audit,
    floquet_sweep,
    mass_ratio_report,
    micromotion_couplings,
    resonance_gap,
    secular_frequency_series,
    secular_params,
)


def _synthetic_basis(j_max: int = 2) -> FloquetBasis:
    rng = np.random.default_rng(7)
    x = rng.normal(size=(4, 4))
    return FloquetBasis(
        energies=np.array([0.0, 0.3, 1.1, 2.5]),
        ion_position_sq=x + x.T,
        j_max=j_max,
    )


def _moments() -> EigenMoments:
    return EigenMoments(
        d=2.0,
        energies=np.array([0.0, 0.5, 1.5]),
        parity=np.array([1, -1, 1]),
        bound_weight=np.zeros(3),
        com_sq=np.array([[1.0, 0.0, 0.4], [0.0, 2.0, 0.0], [0.4, 0.0, 3.0]]),
        rel_sq=np.array([[2.0, 0.0, -0.6], [0.0, 3.0, 0.0], [-0.6, 0.0, 4.0]]),
        com_rel=np.array([[0.0, 0.2, 0.0], [0.2, 0.0, 0.1], [0.0, 0.1, 0.0]]),
        m_i=3.0,
        m_a=1.0,
    )


@pytest.mark.parametrize("drive, expected", [(70.5, 9.970), (967.0, 136.75)])
def test_secular_frequency_examples(drive, expected):
    omega_i, g = secular_params(PaulTrapParams(a=0.0, q=0.4, drive=drive))
    assert omega_i == pytest.approx(expected, rel=1e-3)
    assert g == pytest.approx(1.0 / math.sqrt(2.0))


def test_series_agrees_at_small_q():
    small = PaulTrapParams(a=0.0, q=0.05, drive=10.0)
    assert secular_frequency_series(small) == pytest.approx(secular_params(small)[0], rel=1e-3)
    large = PaulTrapParams(a=0.0, q=0.4, drive=10.0)
    assert secular_frequency_series(large) > secular_params(large)[0]


def test_for_secular_round_trip():
    trap = PaulTrapParams.for_secular(3.0, 0.3)
    assert secular_params(trap)[0] == pytest.approx(3.0)


@pytest.mark.parametrize(
    "a, q, drive",
    [(0.0, 0.95, 10.0), (0.0, 0.0, 10.0), (-0.01, 0.3, 10.0), (0.0, 0.3, 0.0)],
)
def test_trap_parameters_outside_domain(a, q, drive):
    with pytest.raises(DomainError):
        PaulTrapParams(a=a, q=q, drive=drive)


def test_floquet_matrix_structure():
    basis = _synthetic_basis()
    trap = PaulTrapParams(a=0.0, q=0.3, drive=7.0)
    h = build_floquet_hamiltonian(basis, trap, m_i=2.0)
    n = basis.n_levels
    assert h.shape == (5 * n, 5 * n)
    np.testing.assert_allclose(h, h.T, atol=1e-14)
    np.testing.assert_allclose(np.diag(h), basis.floquet_energies(7.0))
    for a in range(5):
        for b in range(5):
            if abs(a - b) >= 3:
                assert not h[a * n : (a + 1) * n, b * n : (b + 1) * n].any()


def test_too_few_classes_rejected():
    trap = PaulTrapParams(a=0.0, q=0.3, drive=7.0)
    with pytest.raises(PreconditionError):
        build_floquet_hamiltonian(_synthetic_basis(j_max=1), trap, m_i=2.0)


def test_vanishing_q_leaves_bare_ladder():
    basis = _synthetic_basis()
    trap = PaulTrapParams(a=0.0, q=1e-5, drive=10.0)
    values = np.linalg.eigvalsh(build_floquet_hamiltonian(basis, trap, m_i=2.0))
    np.testing.assert_allclose(values, np.sort(basis.floquet_energies(10.0)), atol=1e-6)


def test_class_shift_moves_spectrum_by_drive():
    basis = _synthetic_basis()
    trap = PaulTrapParams(a=0.0, q=0.5, drive=6.0)
    base = np.linalg.eigvalsh(build_floquet_hamiltonian(basis, trap, m_i=2.0))
    shifted = np.linalg.eigvalsh(build_floquet_hamiltonian(basis.shifted(2), trap, m_i=2.0))
    np.testing.assert_allclose(shifted, base + 2 * 6.0, atol=1e-10)


def test_brillouin_reduction_stays_in_zone():
    values = np.array([-13.2, -3.0, 0.0, 2.9, 3.0, 17.5])
    reduced = brillouin_reduce(values, 6.0)
    assert np.all(reduced >= -3.0) and np.all(reduced < 3.0)
    turns = (values - reduced) / 6.0
    np.testing.assert_allclose(turns, np.round(turns), atol=1e-12)


def test_resonance_gap_of_two_level_mixing():
    values, vectors = np.linalg.eigh(np.array([[0.0, 0.04], [0.04, 0.0]]))
    _, gap, k1, k2 = resonance_gap(values, vectors, 0)
    assert gap == pytest.approx(0.08)
    assert {k1, k2} == {0, 1}


def test_couplings_follow_mass_scaling():
    mom = _moments()
    trap = PaulTrapParams(a=0.0, q=0.4, drive=20.0)
    table = micromotion_couplings(mom, trap, omega_a=2.0)
    omega_i, g = secular_params(trap)
    beta = 0.25
    assert table.ground == 0 and table.mass_ratio == pytest.approx(beta)
    np.testing.assert_allclose(table.detuning, [0.0, -0.5, -1.5])
    assert table.v_rr[0] == 0.0
    assert table.v_rr[2] == pytest.approx(g * 3.0 * omega_i * 1.5 * beta**2 * 0.6)
    assert table.v_RR[2] == pytest.approx(g * 3.0 * omega_i * 1.5 * 0.4)
    assert table.v_rR[1] == pytest.approx(g * 3.0 * omega_i * 0.5 * beta * 0.2)
    assert table.in_trap_units().v_RR[2] == pytest.approx(table.v_RR[2] / 2.0)


def test_mass_ratio_report():
    mom = _moments()
    trap = PaulTrapParams(a=0.0, q=0.4, drive=20.0)
    heavy = micromotion_couplings(mom, trap, omega_a=1.0)
    report = mass_ratio_report(heavy, heavy, (1.0, 2.0), (1.0, 2.0))
    assert report["observed_ratio"] == pytest.approx(1.0)
    assert report["mass_scaling_ratio"] == pytest.approx(1.0)
    assert report["within_factor_2"] == 1.0


def test_com_selection_rules_hold_for_oscillator_basis(free_two_body):
    report = com_selection_rule_audit(free_two_body.basis)
    assert report.passed
    assert report.max_r_violation <= 1e-10
    assert report.max_r_sq_error <= 1e-10


def test_floquet_sweep_preconditions(free_two_body):
    trap = PaulTrapParams.for_secular(2.0, 0.3)
    with pytest.raises(PreconditionError):
        floquet_sweep(free_two_body, [2.0], trap, j_max=1)
    with pytest.raises(PreconditionError):
        floquet_sweep(free_two_body, [2.0], PaulTrapParams.for_secular(2.5, 0.3))


def test_floquet_sweep_on_free_system(free_two_body):
    trap = PaulTrapParams.for_secular(2.0, 0.3)
    sweep = floquet_sweep(
        free_two_body,
        [2.0, 2.5],
        trap,
        n_levels=30,
        n_window=12,
        check_j_convergence=False,
        threads=1,
    )
    assert list(sweep.d_values) == [2.5, 2.0]
    assert sweep.energies.shape == (2, 12)
    assert np.all(sweep.reduced >= -0.5 * trap.drive)
    assert np.all(sweep.reduced < 0.5 * trap.drive)
    assert np.all(np.abs(sweep.j_class) <= 2)
    assert sweep.pair_gaps.shape == (2, 2)
    assert np.all(sweep.pair_gaps >= 0.0)
