"""게재된 수치에 대한 회귀 검사. 느리므로 ATOMION_RUN_SLOW=1 일 때만 실행합니다."""

from __future__ import annotations

import math
import os

import pandas as pd
import pytest

from atomion_dw.commands.config import config_from_mapping
from atomion_dw.commands.runner import run

pytestmark = pytest.mark.skipif(
    os.getenv("ATOMION_RUN_SLOW", "0") != "1",
    reason="set ATOMION_RUN_SLOW=1 to run the slow published-value checks",
)

_SPECIES = {"atom": "Rb87", "ion": "Yb171+", "polarizability_au": 319.0}


def _rate_at(frame: pd.DataFrame, d_nm: float, **where) -> float:
    rows = frame[(frame["d_nm"] - d_nm).abs() < 1e-6]
    for key, value in where.items():
        rows = rows[rows[key] == value]
    assert len(rows) == 1 and bool(rows["valid"].iloc[0])
    return float(rows["J_over_h_Hz"].iloc[0])


@pytest.mark.parametrize(
    "phi, expected_hz",
    [(math.pi / 4, 56.0), (math.pi / 3, 202.0)],
)
def test_static_ground_pair_rate_at_900nm(tmp_path, phi, expected_hz):
    config = config_from_mapping(
        {
            "species": _SPECIES,
            "traps": {"omega_a_khz": 1.8},
            "phases": {"phi_even_rad": -phi, "phi_odd_rad": phi},
            "basis": {"n_states": 45, "n_levels": 20},
            "sweep": {"d_values_nm": [1300.0, 1100.0, 1000.0, 900.0]},
        }
    )
    archive = run(config, "spectrum-static", tmp_path, threads=2)
    j = _rate_at(archive.read_csv("tunnelling_static.csv"), 900.0)
    assert j == pytest.approx(expected_hz, rel=0.15)


def test_moving_ion_rates_at_775nm(tmp_path):
    config = config_from_mapping(
        {
            "species": _SPECIES,
            "traps": {"omega_a_khz": 1.8, "omega_i_khz": 9.9},
            "basis": {"n_com": 40, "n_rel": 30, "n_levels": 40},
            "sweep": {"d_values_nm": [1000.0, 900.0, 850.0, 800.0, 775.0], "n_i_max": 1},
        }
    )
    archive = run(config, "spectrum-2body", tmp_path, threads=2)
    rates = archive.read_csv("tunnelling_2body.csv")
    assert _rate_at(rates, 775.0, n_i=0) == pytest.approx(101.0, rel=0.2)
    assert _rate_at(rates, 775.0, n_i=1) == pytest.approx(37.0, rel=0.2)
