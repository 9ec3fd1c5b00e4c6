from __future__ import annotations

import math

import pytest

from atomion_dw.core.errors import ConfigError, DomainError
from atomion_dw.physics.species_units import (
    SpeciesPair,
    UnitSystem,
    characteristic_scales,
    from_dimensionless,
    species_mass_u,
    split_unit_suffix,
    to_dimensionless,
)


def test_rb_yb_characteristic_scales(rb_yb):
    s = characteristic_scales(rb_yb)
    assert s.r_star_nm == pytest.approx(306.0, rel=0.01)
    assert s.e_star_over_h_hz == pytest.approx(935.0, rel=0.01)


def test_li_yb_characteristic_scales(li_yb):
    s = characteristic_scales(li_yb)
    assert s.r_star_nm == pytest.approx(75.0, rel=0.01)
    assert s.e_star_over_h_hz == pytest.approx(133e3, rel=0.01)


def test_c4_sources_agree(rb_yb):
    from_r = SpeciesPair.from_r_star(rb_yb.atom_mass_u, rb_yb.ion_mass_u, rb_yb.r_star_m * 1e9)
    assert from_r.c4_au == pytest.approx(rb_yb.c4_au, rel=1e-12)
    assert rb_yb.c4_au == pytest.approx(0.5 * 319.0)


def test_ion_mass_drops_one_electron():
    assert species_mass_u("Yb171") - species_mass_u("Yb171+") == pytest.approx(5.48579909e-4, rel=1e-6)


def test_unknown_species_lists_known_names():
    with pytest.raises(DomainError, match="Rb87"):
        species_mass_u("Xx1")


def test_exactly_one_c4_source_required():
    with pytest.raises(ConfigError):
        SpeciesPair.from_names("Rb87", "Yb171+")
    with pytest.raises(ConfigError):
        SpeciesPair.from_names("Rb87", "Yb171+", c4_au=160.0, r_star_nm=306.0)


@pytest.mark.parametrize("field", ["atom_mass_u", "ion_mass_u", "c4_au"])
def test_non_positive_inputs_rejected(field):
    values = {"atom_mass_u": 87.0, "ion_mass_u": 171.0, "c4_au": 160.0}
    values[field] = -1.0
    with pytest.raises(DomainError):
        SpeciesPair(**values)


def test_dimensionless_frequency_uses_estar(rb_yb):
    problem = to_dimensionless(rb_yb, {"omega_a_khz": 1.8, "d_nm": 900.0})
    e_star_hz = characteristic_scales(rb_yb).e_star_over_h_hz
    assert problem["omega_a"] == pytest.approx(1800.0 / e_star_hz, rel=1e-12)
    assert problem["d"] == pytest.approx(900e-9 / rb_yb.r_star_m, rel=1e-12)
    assert problem.mu == 0.5
    assert problem.m_a + problem.m_i == pytest.approx(problem.total_mass)


def test_round_trip_restores_physical_keys(rb_yb):
    physical = {"omega_i_khz": 9.9, "d_nm": 775.0, "t_ms": 2.38, "temp_nk": 120.0}
    problem = to_dimensionless(rb_yb, physical)
    back = from_dimensionless(problem, {"omega_i": "_khz", "d": "_nm", "t": "_ms", "temp": "_nk"})
    for key, value in physical.items():
        assert back[key] == pytest.approx(value, rel=1e-12)


def test_unitless_key_rejected(rb_yb):
    with pytest.raises(ConfigError, match="unit suffix"):
        to_dimensionless(rb_yb, {"omega_a": 1.8})


def test_split_unit_suffix_prefers_longest_match():
    assert split_unit_suffix("c4_au") == ("c4", "_au")
    assert split_unit_suffix("omega_a_khz") == ("omega_a", "_khz")
    assert split_unit_suffix("d_floor_rstar") == ("d_floor", "_rstar")


def test_time_unit_is_hbar_over_estar(rb_yb):
    units = UnitSystem.for_pair(rb_yb)
    # E*/h = 1/(2π t*)
    assert units.time_unit_s * units.frequency_unit_hz == pytest.approx(1.0 / (2.0 * math.pi))
