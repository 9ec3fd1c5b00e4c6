"""아카이브 CSV 만 읽어 그림을 그리는 독립 실행 스크립트를 만듭니다.

스크립트 안에는 수치 계산이 없고 pandas/matplotlib 로 읽고 그리기만 합니다.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from string import Template

import pandas as pd

from atomion_dw.core.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FigureSpec:
    title: str
    requires: dict[str, tuple[str, ...]]
    body: str


_HEADER = '''"""$title (generated from CSV, no computation)."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

HERE = Path(__file__).resolve().parent

plt.style.use("default")
plt.rcParams.update({"font.size": 10, "figure.dpi": 120, "axes.grid": True})
'''

_FOOTER = '''
plt.tight_layout()
plt.savefig(HERE / "$figure_id.png")
plt.close()
'''

_SPECTRUM_AND_J = '''
spec = pd.read_csv(HERE / "$spectrum")
rates = pd.read_csv(HERE / "$rates")
fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 8), sharex=True)
for track, rows in spec.groupby("track_id"):
    ax1.plot(rows["d_nm"], rows["E_over_h_Hz"] / 1e3, lw=0.8, color="0.3")
ax1.set_ylabel("E / h [kHz]")
ax1.set_title("$title")
valid = rates[rates["valid"].astype(bool)]
for key, rows in valid.groupby("$group"):
    ax2.plot(rows["d_nm"], rows["J_over_h_Hz"], marker=".", label=f"$group={key}")
ax2.set_xlabel("d [nm]")
ax2.set_ylabel("J / h [Hz]")
ax2.set_yscale("log")
ax2.legend()
'''

_SPECTRUM_ONLY = '''
spec = pd.read_csv(HERE / "$spectrum")
fig, ax = plt.subplots(figsize=(7, 5))
for track, rows in spec.groupby("track_id"):
    ax.plot(rows["d_nm"], rows["E_over_h_Hz"] / 1e3, lw=0.8, color="0.3")
ax.set_xlabel("d [nm]")
ax.set_ylabel("E / h [kHz]")
ax.set_title("$title")
'''

_DENSITY = '''
files = sorted(HERE.glob("density_d*.csv"))
fig, axes = plt.subplots(1, len(files), figsize=(4 * len(files), 4), squeeze=False)
for ax, path in zip(axes[0], files):
    grid = pd.read_csv(path).pivot(index="z_a_Rstar", columns="z_i_Rstar", values="abs_psi")
    ax.pcolormesh(grid.columns, grid.index, grid.values, shading="auto")
    ax.set_xlabel("z_i [R*]")
    ax.set_ylabel("z_a [R*]")
    ax.set_title(path.stem)
'''

_TRAJECTORY = '''
traj = pd.read_csv(HERE / "trajectory.csv")
fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
ax1.plot(traj["t_ms"], traj["O0"], label="O0")
if traj["O1"].notna().any():
    ax1.plot(traj["t_ms"], traj["O1"], label="O1")
ax1.set_ylabel("overlap")
ax1.set_ylim(0, 1.02)
ax1.legend()
ax2.plot(traj["t_ms"], traj["d_nm"])
ax2.set_xlabel("t [ms]")
ax2.set_ylabel("d [nm]")
'''

_COUPLINGS = '''
table = pd.read_csv(HERE / "couplings.csv")
names = ["V_rr_over_hbar_omega_a", "V_rR_over_hbar_omega_a", "V_RR_over_hbar_omega_a"]
fig, axes = plt.subplots(1, 3, figsize=(12, 4), sharey=True)
for ax, name in zip(axes, names):
    for d, rows in table.groupby("d_nm"):
        ax.plot(rows["detuning_kHz"], rows[name], ".", ms=3, label=f"d={d:.0f} nm")
    ax.set_xlabel("(E_g - E_l) / h [kHz]")
    ax.set_title(name.split("_over")[0])
axes[0].set_ylabel("|V| / hbar omega_a")
axes[0].legend()
'''

_THERMAL = '''
table = pd.read_csv(HERE / "thermal_fidelity.csv")
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(table["temperature_nK"], table["F"], marker="o")
ax.set_xlabel("T [nK]")
ax.set_ylabel("F(T)")
ax.set_ylim(0, 1.02)
'''

_FLOQUET = '''
spec = pd.read_csv(HERE / "spectrum_floquet.csv")
pair = pd.read_csv(HERE / "floquet_pair.csv")
fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 8), sharex=True)
sc = ax1.scatter(spec["d_nm"], spec["brillouin_reduced_E_over_h_Hz"] / 1e3, c=spec["j_class"], s=3, cmap="coolwarm")
fig.colorbar(sc, ax=ax1, label="j")
ax1.set_ylabel("reduced quasi-energy / h [kHz]")
for branch, rows in pair.groupby("branch"):
    ax2.plot(rows["d_nm"], rows["gap_Hz"], marker=".", label=branch)
ax2.set_xlabel("d [nm]")
ax2.set_ylabel("resonance gap / h [Hz]")
ax2.legend()
'''

_SPECTRUM_COLS = ("d_nm", "track_id", "E_over_h_Hz")
_RATE_COLS = ("d_nm", "J_over_h_Hz", "valid")

FIGURES: dict[str, FigureSpec] = {
    "fig2": FigureSpec(
        "Static-ion double-well spectrum and tunnelling rate",
        {"spectrum_static.csv": _SPECTRUM_COLS, "tunnelling_static.csv": _RATE_COLS + ("pair",)},
        Template(_SPECTRUM_AND_J).safe_substitute(
            spectrum="spectrum_static.csv", rates="tunnelling_static.csv", group="pair"
        ),
    ),
    "fig3": FigureSpec(
        "Moving-ion spectrum and ion-resolved tunnelling",
        {"spectrum_2body.csv": _SPECTRUM_COLS, "tunnelling_2body.csv": _RATE_COLS + ("n_i",)},
        Template(_SPECTRUM_AND_J).safe_substitute(
            spectrum="spectrum_2body.csv", rates="tunnelling_2body.csv", group="n_i"
        ),
    ),
    "fig4": FigureSpec(
        "Ion-state dependence of the tunnelling rate",
        {"spectrum_2body.csv": _SPECTRUM_COLS, "tunnelling_2body.csv": _RATE_COLS + ("n_i",)},
        Template(_SPECTRUM_AND_J).safe_substitute(
            spectrum="spectrum_2body.csv", rates="tunnelling_2body.csv", group="n_i"
        ),
    ),
    "fig5": FigureSpec("Two-body wavefunction density", {}, _DENSITY),
    "fig6": FigureSpec(
        "Overlaps and controlled separation",
        {"trajectory.csv": ("t_ms", "O0", "O1", "d_nm")},
        _TRAJECTORY,
    ),
    "fig7": FigureSpec(
        "Micromotion coupling matrix elements",
        {
            "couplings.csv": (
                "d_nm",
                "detuning_kHz",
                "V_rr_over_hbar_omega_a",
                "V_rR_over_hbar_omega_a",
                "V_RR_over_hbar_omega_a",
            )
        },
        _COUPLINGS,
    ),
    "fig8": FigureSpec(
        "Thermal overlap fidelity",
        {"thermal_fidelity.csv": ("temperature_nK", "F")},
        _THERMAL,
    ),
    "fig9": FigureSpec(
        "Floquet quasi-energies and ground-pair resonance gaps",
        {
            "spectrum_floquet.csv": ("d_nm", "brillouin_reduced_E_over_h_Hz", "j_class"),
            "floquet_pair.csv": ("d_nm", "branch", "gap_Hz"),
        },
        _FLOQUET,
    ),
    "fig10": FigureSpec(
        "Static-ion 3D double-well spectrum",
        {"spectrum_3d.csv": _SPECTRUM_COLS},
        Template(_SPECTRUM_ONLY).safe_substitute(spectrum="spectrum_3d.csv"),
    ),
}


def check_requirements(directory: Path, figure_id: str) -> None:
    spec = FIGURES[figure_id]
    problems = []
    for name, cols in spec.requires.items():
        path = Path(directory) / name
        if not path.exists():
            problems.append(f"{name} (missing file; needs columns {', '.join(cols)})")
            continue
        header = set(pd.read_csv(path, nrows=0).columns)
        missing = [c for c in cols if c not in header]
        if missing:
            problems.append(f"{name} lacks columns {', '.join(missing)}")
    if figure_id == "fig5" and not any(Path(directory).glob("density_d*.csv")):
        problems.append("density_d*.csv (missing; needs columns z_i_Rstar, z_a_Rstar, abs_psi)")
    if problems:
        raise ConfigError(f"cannot emit {figure_id}: " + "; ".join(problems))


def emit_plot_script(directory: Path, figure_id: str) -> Path:
    """``plot_<figure_id>.py`` 를 아카이브 디렉터리에 씁니다."""
    if figure_id not in FIGURES:
        raise ConfigError(
            f"unknown figure id {figure_id!r} (available: {', '.join(FIGURES)})"
        )
    check_requirements(directory, figure_id)
    spec = FIGURES[figure_id]
    text = (
        Template(_HEADER).substitute(title=spec.title)
        + Template(spec.body).safe_substitute(title=spec.title)
        + Template(_FOOTER).substitute(figure_id=figure_id)
    )
    path = Path(directory) / f"plot_{figure_id}.py"
    path.write_text(text, encoding="utf-8")
    logger.info("plot script written: %s", path)
    return path
