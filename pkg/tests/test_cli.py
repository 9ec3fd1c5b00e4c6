from __future__ import annotations

import json
import textwrap

import pandas as pd
import pytest

from atomion_dw.cli import build_parser, main

_STATIC_TOML = """
seed = 7

[species]
atom = "Rb87"
ion = "Yb171+"
polarizability_au = 319.0

[traps]
omega_a_khz = 1.8

[grid]
interacting = false

[basis]
n_states = 20
n_levels = 6

[sweep]
d_values_nm = [700.0, 600.0]

[output]
figures = ["fig2", "fig6"]
"""


@pytest.fixture()
def static_config(tmp_path):
    path = tmp_path / "static.toml"
    path.write_text(textwrap.dedent(_STATIC_TOML))
    return path


def test_parser_knows_every_subcommand():
    parser = build_parser()
    args = parser.parse_args(["spectrum-2body", "--config", "x.toml", "--threads", "2", "--strict"])
    assert (args.subcommand, args.threads, args.strict) == ("spectrum-2body", 2, True)
    args = parser.parse_args(["spectrum-2body", "--density-d", "775", "900"])
    assert args.density_d == [775.0, 900.0]
    with pytest.raises(SystemExit):
        parser.parse_args(["spectrum-static", "--density-d", "775"])
    with pytest.raises(SystemExit):
        parser.parse_args(["spectrum-4body"])


def test_missing_config_exits_2(tmp_path):
    assert main(["spectrum-static", "--out", str(tmp_path)]) == 2
    assert main(["spectrum-static", "--config", str(tmp_path / "nope.toml")]) == 2


def test_bad_thread_count_exits_2(static_config, tmp_path):
    assert main(["spectrum-static", "--config", str(static_config), "--threads", "0"]) == 2


def test_unknown_plot_id_exits_2(tmp_path):
    assert main(["emit-plots", "fig42", "--out", str(tmp_path)]) == 2


def test_invalid_config_value_exits_2(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(textwrap.dedent(_STATIC_TOML).replace("omega_a_khz = 1.8", "omega_a = 1.8"))
    assert main(["spectrum-static", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_spectrum_static_end_to_end(static_config, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["spectrum-static", "--config", str(static_config), "--out", str(out_a)]) == 0
    assert main(
        ["spectrum-static", "--config", str(static_config), "--out", str(out_b), "--threads", "2"]
    ) == 0

    for name in ("spectrum_static.csv", "tunnelling_static.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    spectrum = pd.read_csv(out_a / "spectrum_static.csv")
    assert {"d_nm", "track_id", "E_over_h_Hz"} <= set(spectrum.columns)
    assert sorted(spectrum["d_nm"].unique()) == [600.0, 700.0]

    # fig6 needs trajectory.csv, which this subcommand does not write
    assert (out_a / "plot_fig2.py").exists()
    assert not (out_a / "plot_fig6.py").exists()
    meta = json.loads((out_a / "metadata.json").read_text())
    assert meta["subcommand"] == "spectrum-static"
    assert "plot_fig2.py" in meta["artifacts"]

    assert main(["emit-plots", "fig2", "--out", str(out_a)]) == 0
