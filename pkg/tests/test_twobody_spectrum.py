from __future__ import annotations

import numpy as np
import pytest

from atomion_dw.core.errors import DomainError
from atomion_dw.physics.qdt_numerov import ShortRangePhases
from atomion_dw.physics.twobody_spectrum import (
    UNLABELED,
    TwoBodyConfig,
    com_rel_frequencies,
    density_from_vector,
    fock_labels,
    ion_resolved_tunnelling,
    two_body_sweep,
)


def _separable_levels(double_well_fd, d: float, n: int) -> np.ndarray:
    # 이온 ω_i = 2 (m_i = 1), 원자 이중 우물 (m_a = 1, ω_a = 1)
    atom = double_well_fd(1.0, 1.0, d, 6)
    ion = 2.0 * (np.arange(4) + 0.5)
    return np.sort(np.add.outer(ion, atom).ravel())[:n]


def test_rb_yb_normal_modes(rb_yb):
    w_com, w_rel = com_rel_frequencies(1.8, 9.9, rb_yb)
    assert w_com == pytest.approx(8.128, abs=0.01)
    assert w_rel == pytest.approx(5.93, abs=0.01)


def test_normal_modes_conserve_trace():
    cfg = TwoBodyConfig(m_a=0.6, m_i=1.9, omega_a=1.3, omega_i=4.0, phases=ShortRangePhases())
    w_com, w_rel = cfg.frequencies
    # M ω_R² + M ω_r² = (m_a + m_i)(ω_a² + ω_i²)
    assert w_com**2 + w_rel**2 == pytest.approx(1.3**2 + 4.0**2)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_rel": 1},
        {"n_com": 0},
        {"omega_i": 0.0},
        {"m_a": -1.0},
    ],
)
def test_config_rejects_bad_values(kwargs):
    values = dict(m_a=1.0, m_i=1.0, omega_a=1.0, omega_i=2.0, phases=ShortRangePhases())
    values.update(kwargs)
    with pytest.raises(DomainError):
        TwoBodyConfig(**values)


def test_from_pair_uses_reduced_mass_units(rb_yb):
    cfg = TwoBodyConfig.from_pair(rb_yb, 1.0, 5.0, ShortRangePhases())
    assert cfg.reduced_mass == pytest.approx(0.5)
    assert cfg.m_i / cfg.m_a == pytest.approx(rb_yb.ion_mass_u / rb_yb.atom_mass_u)


def test_non_interacting_spectrum_is_separable(free_two_body, double_well_fd):
    d = 1.5
    energies = free_two_body.diagonalize(d, 3)[0]
    np.testing.assert_allclose(energies, _separable_levels(double_well_fd, d, 3), atol=5e-3)


def test_parametric_parts_rebuild_hamiltonian(free_two_body):
    fixed, z4, pref = free_two_body.parametric_parts()
    d = 2.0
    rebuilt = fixed + pref * z4 / (8.0 * d * d)
    rebuilt[np.diag_indices_from(rebuilt)] += pref * d * d / 8.0
    np.testing.assert_allclose(rebuilt, free_two_body.hamiltonian(d), atol=1e-10)
    with pytest.raises(DomainError):
        free_two_body.hamiltonian(0.0)


def test_localized_pair_sits_in_opposite_wells(free_two_body):
    d = 3.0
    left, right = free_two_body.localized_pair(d, 0)
    pos = free_two_body.atom_position(np.column_stack([left, right]))
    assert pos[0, 0] < -0.5 * d
    assert pos[1, 1] > 0.5 * d
    assert float(left @ right) == pytest.approx(0.0, abs=1e-10)


def test_ion_resolved_rates_match_free_atom(free_two_body, double_well_fd):
    d_list = [3.0, 2.8, 2.6]
    sweep = two_body_sweep(
        free_two_body, d_list, n_levels=30, n_i_max=1, check_convergence=False, threads=1
    )
    assert "|0,0>+" in sweep.labels and "|1,0>-" in sweep.labels
    tables = ion_resolved_tunnelling(sweep, 1)
    expected = [np.diff(double_well_fd(1.0, 1.0, d, 2))[0] for d in d_list]
    for n_i in (0, 1):
        assert tables[n_i].valid.all()
        np.testing.assert_allclose(tables[n_i].j, expected, rtol=2e-2)


def test_density_is_normalized(free_two_body):
    _, vectors, _ = free_two_body.diagonalize(1.5, 1)
    grid = np.linspace(-4.5, 4.5, 91)
    density = density_from_vector(free_two_body, vectors[:, 0], grid, grid)
    assert density.abs_psi.shape == (91, 91)
    assert density.norm == pytest.approx(1.0, abs=5e-3)
    assert np.all(density.abs_psi >= 0.0)


def test_fock_labels_mark_ambiguous_and_molecular_states():
    keys = [(0, 0), (1, 0)]
    weights = np.array(
        [
            [0.95, 0.90, 0.48, 0.10, 0.0],
            [0.02, 0.05, 0.46, 0.85, 0.0],
        ]
    )
    parity = np.array([1, -1, 1, 1, -1])
    bound = np.array([0.0, 0.0, 0.0, 0.0, 0.99])
    labels, fock = fock_labels(keys, weights, parity, bound)
    assert labels == ["|0,0>+", "|0,0>-", UNLABELED, "|1,0>+", "mol0"]
    assert fock[0] == (0, 0) and fock[2] == (-1, -1)
