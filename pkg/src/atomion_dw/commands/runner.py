"""서브커맨드별 파이프라인: 설정 → 무차원화 → 계산 → CSV/JSON/플롯 스크립트."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from atomion_dw.commands.archive import ResultArchive
from atomion_dw.commands.models import ControlSection, RunConfig
from atomion_dw.commands.plots import FIGURES, emit_plot_script
from atomion_dw.control.crab import CrabSettings, crab_optimize
from atomion_dw.control.protocols import (
    ProtocolSetup,
    check_overlap_bounds,
    evolve_branches,
    overlap_objectives,
    prepare_protocol,
    protocol_entanglement,
    pulse_objective,
)
from atomion_dw.control.pulses import BaselineRamp, ControlPulse
from atomion_dw.control.thermal import ThermalEnsemble, fidelity_curve, thermal_fidelity
from atomion_dw.core.cache import ArrayCache
from atomion_dw.core.errors import ConfigError, ConvergenceWarning
from atomion_dw.core.settings import get_cache_dir, get_default_tier
from atomion_dw.physics.floquet_micromotion import (
    PaulTrapParams,
    com_selection_rule_audit,
    eigen_moments,
    floquet_sweep,
    micromotion_couplings,
    secular_params,
)
from atomion_dw.physics.qdt_numerov import ShortRangePhases, merge_parities, solve_1d
from atomion_dw.physics.species_units import (
    SpeciesPair,
    UnitSystem,
    species_mass_u,
    to_dimensionless,
)
from atomion_dw.physics.static_spectrum import (
    StaticModel,
    ground_pair_tracks,
    static_spectrum_3d,
    static_spectrum_sweep,
    tunnelling_rate,
)
from atomion_dw.physics.tracking import SpectrumSweep, TunnellingTable
from atomion_dw.physics.twobody_spectrum import (
    TwoBodyConfig,
    TwoBodyModel,
    build_product_basis,
    com_rel_frequencies,
    ion_pair_tracks,
    ion_resolved_tunnelling,
    two_body_sweep,
    wavefunction_density,
)

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    "solve-relative",
    "spectrum-static",
    "spectrum-3d",
    "spectrum-2body",
    "spectrum-floquet",
    "evolve",
    "optimize",
    "thermal-fidelity",
)


def species_pair(config: RunConfig) -> SpeciesPair:
    s = config.species
    m_a = s.atom_mass_u if s.atom_mass_u is not None else species_mass_u(s.atom or "")
    m_i = s.ion_mass_u if s.ion_mass_u is not None else species_mass_u(s.ion or "")
    names = {"atom": s.atom or "atom", "ion": s.ion or "ion"}
    if s.c4_au is not None:
        return SpeciesPair(m_a, m_i, s.c4_au, **names)
    if s.polarizability_au is not None:
        return SpeciesPair.from_polarizability(m_a, m_i, s.polarizability_au, **names)
    return SpeciesPair.from_r_star(m_a, m_i, float(s.r_star_nm or 0.0), **names)


@dataclass
class RunContext:
    config: RunConfig
    tier: str
    pair: SpeciesPair
    units: UnitSystem
    traps: dict[str, float]
    sizes: dict[str, int]
    archive: ResultArchive
    cache: Optional[ArrayCache]
    threads: Optional[int]

    @classmethod
    def create(
        cls,
        config: RunConfig,
        archive: ResultArchive,
        *,
        tier: Optional[str] = None,
        threads: Optional[int] = None,
    ) -> "RunContext":
        pair = species_pair(config)
        physical = {
            k: v
            for k, v in config.traps.model_dump().items()
            if k.endswith("_khz") and v is not None
        }
        problem = to_dimensionless(pair, physical)
        chosen = tier or config.tier or get_default_tier()
        cache = ArrayCache(get_cache_dir()) if config.output.cache else None
        return cls(
            config=config,
            tier=chosen,
            pair=pair,
            units=problem.units,
            traps=dict(problem.quantities),
            sizes=config.basis.resolved(chosen),
            archive=archive,
            cache=cache,
            threads=threads,
        )

    # --- 변환 ---------------------------------------------------------

    def length(self, nm: float) -> float:
        return self.units.length(float(nm) * 1e-9)

    def length_nm(self, value: float) -> float:
        return self.units.length_si(float(value)) * 1e9

    def hz(self, energy: np.ndarray) -> np.ndarray:
        return np.asarray(energy) * self.units.frequency_unit_hz

    def time_ms(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(t) * self.units.time_unit_s * 1e3

    @property
    def phases(self) -> ShortRangePhases:
        p = self.config.phases
        return ShortRangePhases(p.phi_even_rad, p.phi_odd_rad, p.phi_3d_rad)

    @property
    def omega_a(self) -> float:
        return self.traps["omega_a"]

    def d_list(self) -> list[float]:
        try:
            return [self.length(d) for d in self.config.sweep.d_nm()]
        except ValueError as e:
            raise ConfigError(f"sweep: {e}") from e

    # --- 이온 트랩 ----------------------------------------------------

    def paul_trap(self) -> PaulTrapParams:
        t = self.config.traps
        if t.kind != "paul" or t.q is None:
            raise ConfigError("traps.kind must be 'paul' (with q) for this subcommand")
        if "drive" in self.traps:
            return PaulTrapParams(a=t.a, q=t.q, drive=self.traps["drive"])
        return PaulTrapParams.for_secular(self.traps["omega_i"], t.q, t.a)

    def omega_i(self) -> float:
        if self.config.traps.kind == "paul":
            return secular_params(self.paul_trap())[0]
        if "omega_i" not in self.traps:
            raise ConfigError("traps.omega_i_khz is required for a moving ion")
        return self.traps["omega_i"]

    def two_body_model(self) -> TwoBodyModel:
        g = self.config.grid
        cfg = TwoBodyConfig.from_pair(
            self.pair,
            self.omega_a,
            self.omega_i(),
            self.phases,
            n_com=self.sizes["n_com"],
            n_rel=self.sizes["n_rel"],
            interacting=g.interacting,
            n_bound_keep=g.n_bound_keep,
            points_per_wavelength=g.points_per_wavelength,
        )
        basis = build_product_basis(cfg, cache=self.cache, threads=self.threads)
        self.archive.add_metadata(
            basis={"n_com": basis.n_com, "n_rel": basis.n_rel, "size": basis.size},
            omega_com_hz=float(self.hz(basis.omega_com)),
            omega_rel_hz=float(self.hz(basis.omega_rel)),
        )
        return TwoBodyModel(basis)


# --- CSV 변환 --------------------------------------------------------------


def sweep_frame(ctx: RunContext, sweep: SpectrumSweep) -> pd.DataFrame:
    flags = {(a.track, a.d_index) for a in sweep.annotations}
    rows = []
    for t in range(sweep.n_tracks):
        energies = ctx.hz(sweep.track_energies(t))
        parity = sweep.track_parity(t)
        label = sweep.labels[t] if t < len(sweep.labels) else ""
        for i, d in enumerate(sweep.d_values):
            rows.append(
                {
                    "d_nm": ctx.length_nm(d),
                    "d_over_Rstar": float(d),
                    "track_id": t,
                    "E_over_h_Hz": float(energies[i]),
                    "parity_or_l": int(parity[i]) if parity is not None else 0,
                    "label": label,
                    "crossing_flag": int((t, i) in flags),
                }
            )
    return pd.DataFrame(rows)


def _rate_rows(
    ctx: RunContext, table: TunnellingTable, **extra: object
) -> list[dict[str, object]]:
    j_hz = ctx.hz(table.j)
    return [
        {
            "d_nm": ctx.length_nm(d),
            "d_over_Rstar": float(d),
            **extra,
            "J_over_h_Hz": float(j_hz[i]),
            "valid": int(bool(table.valid[i])),
        }
        for i, d in enumerate(table.d)
    ]


# --- 서브커맨드 ------------------------------------------------------------


def run_solve_relative(ctx: RunContext) -> None:
    g = ctx.config.grid
    if ctx.config.traps.omega_i_khz is not None or ctx.config.traps.kind == "paul":
        _, omega = com_rel_frequencies(ctx.omega_a, ctx.omega_i(), ctx.pair)
        mass_factor, coordinate = 1.0, "relative"
    else:
        omega, mass_factor, coordinate = ctx.omega_a, ctx.pair.atom_mass_factor, "atom"
    even, odd = solve_1d(
        ctx.phases,
        mass_factor,
        omega,
        n_states=ctx.sizes["n_states"],
        interacting=g.interacting,
        n_bound_keep=g.n_bound_keep,
        points_per_wavelength=g.points_per_wavelength,
        cache=ctx.cache,
        threads=ctx.threads,
    )
    basis = merge_parities(even, odd)
    frame = pd.DataFrame(
        {
            "index": np.arange(basis.size),
            "parity_or_l": basis.parity,
            "E_over_Estar": basis.energies,
            "E_over_h_Hz": ctx.hz(basis.energies),
            "bound": (basis.energies < 0).astype(int),
        }
    )
    ctx.archive.write_csv("relative_spectrum.csv", frame)
    ctx.archive.add_metadata(
        coordinate=coordinate,
        omega_over_Estar=omega,
        grid_points=basis.grid.n_points,
        n_bound={"even": even.n_bound, "odd": odd.n_bound},
    )


def run_spectrum_static(ctx: RunContext) -> None:
    g = ctx.config.grid
    even, odd = solve_1d(
        ctx.phases,
        ctx.pair.atom_mass_factor,
        ctx.omega_a,
        n_states=ctx.sizes["n_states"],
        interacting=g.interacting,
        n_bound_keep=g.n_bound_keep,
        points_per_wavelength=g.points_per_wavelength,
        cache=ctx.cache,
        threads=ctx.threads,
    )
    model = StaticModel(merge_parities(even, odd))
    sweep = static_spectrum_sweep(
        model, ctx.d_list(), n_levels=ctx.sizes["n_levels"], threads=ctx.threads
    )
    ctx.archive.write_csv("spectrum_static.csv", sweep_frame(ctx, sweep))
    table = tunnelling_rate(sweep, ground_pair_tracks(sweep))
    ctx.archive.write_csv(
        "tunnelling_static.csv", pd.DataFrame(_rate_rows(ctx, table, pair="|0>"))
    )
    ctx.archive.add_metadata(sweep=sweep.metadata, basis={"size": model.basis.size})


def run_spectrum_3d(ctx: RunContext) -> None:
    g = ctx.config.grid
    omega_perp = ctx.traps.get("omega_perp", ctx.omega_a)
    sweep = static_spectrum_3d(
        ctx.config.phases.phi_3d_rad,
        ctx.omega_a,
        omega_perp,
        ctx.d_list(),
        ctx.sizes["l_max"],
        ctx.sizes["n_max"],
        ctx.pair.atom_mass_factor,
        interacting=g.interacting,
        n_bound_keep=g.n_bound_keep,
        points_per_wavelength=g.points_per_wavelength,
        n_levels=ctx.sizes["n_levels"],
        cache=ctx.cache,
        threads=ctx.threads,
    )
    ctx.archive.write_csv("spectrum_3d.csv", sweep_frame(ctx, sweep))
    ctx.archive.add_metadata(sweep=sweep.metadata)


def run_spectrum_2body(ctx: RunContext) -> None:
    s = ctx.config.sweep
    model = ctx.two_body_model()
    sweep = two_body_sweep(
        model,
        ctx.d_list(),
        n_levels=ctx.sizes["n_levels"],
        n_i_max=max(2, s.n_i_max),
        n_a_max=1,
        threads=ctx.threads,
    )
    frame = sweep_frame(ctx, sweep)
    fock = sweep.metadata.get("fock_labels", [])
    frame["n_i_label"] = [fock[t][0] if t < len(fock) else -1 for t in frame["track_id"]]
    frame["n_a_label"] = [fock[t][1] if t < len(fock) else -1 for t in frame["track_id"]]
    ctx.archive.write_csv("spectrum_2body.csv", frame)

    rows = []
    for n_i, table in ion_resolved_tunnelling(sweep, s.n_i_max).items():
        rows += _rate_rows(ctx, table, n_i=n_i)
    ctx.archive.write_csv("tunnelling_2body.csv", pd.DataFrame(rows))

    if s.density_d_nm:
        ground = ion_pair_tracks(sweep, 0)[0]
        axis = np.linspace(-s.density_extent_rstar, s.density_extent_rstar, s.density_points)
        for d_nm in s.density_d_nm:
            grid = wavefunction_density(model, sweep, ground, ctx.length(d_nm), axis, axis)
            zi, za = np.meshgrid(grid.z_i, grid.z_a, indexing="ij")
            ctx.archive.write_csv(
                f"density_d{int(round(d_nm))}nm.csv",
                pd.DataFrame(
                    {"z_i_Rstar": zi.ravel(), "z_a_Rstar": za.ravel(), "abs_psi": grid.abs_psi.ravel()}
                ),
            )
    ctx.archive.add_metadata(sweep={k: v for k, v in sweep.metadata.items() if k != "fock_labels"})


def run_spectrum_floquet(ctx: RunContext) -> None:
    trap = ctx.paul_trap()
    model = ctx.two_body_model()
    n_levels = min(ctx.sizes["floquet_levels"], model.basis.size)
    sweep = floquet_sweep(
        model,
        ctx.d_list(),
        trap,
        ctx.sizes["j_max"],
        n_levels=n_levels,
        n_window=ctx.sizes["n_window"],
        threads=ctx.threads,
    )
    rows = []
    for i, d in enumerate(sweep.d_values):
        energies = ctx.hz(sweep.energies[i])
        reduced = ctx.hz(sweep.reduced[i])
        for k in range(sweep.energies.shape[1]):
            rows.append(
                {
                    "d_nm": ctx.length_nm(d),
                    "d_over_Rstar": float(d),
                    "track_id": k,
                    "E_over_h_Hz": float(energies[k]),
                    "j_class": int(sweep.j_class[i, k]),
                    "brillouin_reduced_E_over_h_Hz": float(reduced[k]),
                    "label": sweep.labels[k],
                }
            )
    ctx.archive.write_csv("spectrum_floquet.csv", pd.DataFrame(rows))
    pair_rows = []
    for i, d in enumerate(sweep.d_values):
        for b, branch in enumerate(("g", "e")):
            pair_rows.append(
                {
                    "d_nm": ctx.length_nm(d),
                    "branch": branch,
                    "E_over_h_Hz": float(ctx.hz(sweep.pair_energies[i, b])),
                    "gap_Hz": float(ctx.hz(sweep.pair_gaps[i, b])),
                }
            )
    ctx.archive.write_csv("floquet_pair.csv", pd.DataFrame(pair_rows))

    coupling_rows = []
    table = None
    for d_nm in ctx.config.sweep.coupling_d_nm:
        mom = eigen_moments(model, ctx.length(d_nm), n_levels)
        table = micromotion_couplings(mom, trap, ctx.omega_a).in_trap_units()
        det_khz = ctx.hz(table.detuning) / 1e3
        for level in range(table.detuning.size):
            coupling_rows.append(
                {
                    "d_nm": float(d_nm),
                    "level": level,
                    "detuning_kHz": float(det_khz[level]),
                    "V_rr_over_hbar_omega_a": float(table.v_rr[level]),
                    "V_rR_over_hbar_omega_a": float(table.v_rR[level]),
                    "V_RR_over_hbar_omega_a": float(table.v_RR[level]),
                }
            )
    if coupling_rows:
        ctx.archive.write_csv("couplings.csv", pd.DataFrame(coupling_rows))
    audit = com_selection_rule_audit(model.basis, table)
    omega_i, g = secular_params(trap)
    ctx.archive.add_metadata(
        floquet={**sweep.metadata, **sweep.extra},
        trap={"a": trap.a, "q": trap.q, "drive_hz": float(ctx.hz(trap.drive))},
        secular={"omega_i_hz": float(ctx.hz(omega_i)), "g": g},
        selection_rules={"passed": audit.passed, "max_r_sq_error": audit.max_r_sq_error},
    )


# --- 동역학 ----------------------------------------------------------------


def _baseline_pulse(ctx: RunContext) -> ControlPulse:
    c = _control(ctx)
    total = ctx.units.time(c.total_time_ms * 1e-3)
    ramp = ctx.units.time(c.ramp_time_ms * 1e-3) if c.ramp_time_ms else 0.25 * total
    baseline = BaselineRamp(
        d_start=ctx.length(c.d_start_nm),
        d_hold=ctx.length(c.d_hold_nm),
        d_end=ctx.length(c.d_end_nm if c.d_end_nm is not None else c.d_start_nm),
        total_time=total,
        ramp_time=ramp,
    )
    return ControlPulse.from_baseline(
        baseline, c.n_harmonics, d_floor=c.d_floor_rstar, seed=ctx.config.seed
    )


def _control(ctx: RunContext) -> ControlSection:
    if ctx.config.control is None:
        raise ConfigError("a [control] section is required for this subcommand")
    return ctx.config.control


def _load_pulse(ctx: RunContext) -> ControlPulse:
    c = _control(ctx)
    if c.pulse_file:
        return ControlPulse.load(Path(c.pulse_file))
    return _baseline_pulse(ctx)


def _setup(ctx: RunContext, pulse: ControlPulse, n_i_max: int, *, wide: bool) -> ProtocolSetup:
    c = _control(ctx)
    b = pulse.baseline
    d_range = None
    if wide:
        d_range = (pulse.d_floor, 1.2 * max(b.d_start, b.d_hold, b.d_end))
    setup = prepare_protocol(
        ctx.two_body_model(),
        pulse,
        n_i_max,
        subspace_levels=c.subspace_levels,
        subspace_samples=c.subspace_samples,
        d_range=d_range,
    )
    if setup.captured:
        ctx.archive.add_metadata(state_capture=setup.captured)
    return setup


def _trajectory_frame(
    ctx: RunContext, setup: ProtocolSetup, pulse: ControlPulse, levels: list[int]
) -> pd.DataFrame:
    c = _control(ctx)
    traj = evolve_branches(
        setup, pulse, levels, n_steps=c.n_steps, n_samples=c.n_samples, threads=ctx.threads
    )
    o0, o1 = overlap_objectives(traj, setup)
    check_overlap_bounds(o0)
    first = traj[0]
    return pd.DataFrame(
        {
            "t_ms": ctx.time_ms(first.times),
            "O0": o0,
            "O1": o1,
            "norm": first.norms,
            "d_nm": [ctx.length_nm(d) for d in first.d_values],
        }
    )


def _pulse_profile(ctx: RunContext, pulse: ControlPulse, n: int = 501) -> pd.DataFrame:
    t = np.linspace(0.0, pulse.total_time, n)
    return pd.DataFrame(
        {
            "t_ms": ctx.time_ms(t),
            "d_nm": [ctx.length_nm(d) for d in pulse(t)],
            "baseline_d_nm": [ctx.length_nm(d) for d in pulse.baseline(t)],
        }
    )


def run_evolve(ctx: RunContext) -> None:
    c = _control(ctx)
    pulse = _load_pulse(ctx)
    levels = [0, 1] if c.objective == "entanglement" else [0]
    setup = _setup(ctx, pulse, max(levels), wide=False)
    frame = _trajectory_frame(ctx, setup, pulse, levels)
    ctx.archive.write_csv("trajectory.csv", frame)
    ctx.archive.write_csv("pulse_profile.csv", _pulse_profile(ctx, pulse))
    summary: dict[str, object] = {
        "O0_final": float(frame["O0"].iloc[-1]),
        "max_norm_drift": float(np.abs(frame["norm"] - 1.0).max()),
    }
    if c.objective == "entanglement":
        summary["entanglement"] = protocol_entanglement(
            setup, pulse, n_steps=c.n_steps, threads=ctx.threads
        )
    ctx.archive.add_metadata(evolve=summary)


def run_optimize(ctx: RunContext) -> None:
    c = _control(ctx)
    template = _baseline_pulse(ctx)
    levels = [0, 1] if c.objective == "entanglement" else [0]
    setup = _setup(ctx, template, max(levels), wide=True)
    settings = CrabSettings(
        n_harmonics=c.n_harmonics,
        max_evals=c.max_evals,
        n_starts=c.n_starts,
        init_scale=c.init_scale_rstar,
        seed=ctx.config.seed,
        d_floor=c.d_floor_rstar,
    )

    def objective(pulse: ControlPulse) -> float:
        return pulse_objective(setup, pulse, c.objective, n_steps=c.n_steps)[0]

    result = crab_optimize(objective, template, settings, threads=ctx.threads)
    ctx.archive.write_csv("optimizer_trace.csv", result.trace_frame())
    result.pulse.save(ctx.archive.path("pulse.json"))
    ctx.archive.artifacts.append("pulse.json")
    ctx.archive.write_csv("trajectory.csv", _trajectory_frame(ctx, setup, result.pulse, levels))
    ctx.archive.write_csv("pulse_profile.csv", _pulse_profile(ctx, result.pulse))
    _, o0, o1 = pulse_objective(setup, result.pulse, c.objective, n_steps=c.n_steps)
    ctx.archive.add_metadata(
        optimize={
            "objective": c.objective,
            "best": result.objective,
            "baseline": result.baseline_objective,
            "improvement": result.improvement,
            "n_evals": result.n_evals,
            "start_best": result.start_objectives,
            "O0_final": o0,
            "O1_final": o1,
        }
    )


def run_thermal_fidelity(ctx: RunContext) -> None:
    c = _control(ctx)
    pulse = _load_pulse(ctx)
    omega_i = ctx.omega_i()
    setup = _setup(ctx, pulse, c.n_cut, wide=False)
    if c.temperatures_nk:
        temps = np.array([ctx.units.temperature(t * 1e-9) for t in c.temperatures_nk])
    else:
        temps = omega_i * np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0])
    f0, overlaps = thermal_fidelity(
        setup,
        pulse,
        ThermalEnsemble(float(temps[0]), omega_i, c.n_cut),
        n_steps=c.n_steps,
        threads=ctx.threads,
    )
    curve = fidelity_curve(overlaps, temps, omega_i, c.n_cut)
    normalized = [
        ThermalEnsemble(float(t), omega_i, c.n_cut).normalized_probabilities
        @ np.array([overlaps[n] for n in range(c.n_cut + 1)])
        for t in temps
    ]
    ctx.archive.write_csv(
        "thermal_fidelity.csv",
        pd.DataFrame(
            {
                "temperature_nK": [ctx.units.temperature_si(t) * 1e9 for t in temps],
                "kT_over_hbar_omega_i": temps / omega_i,
                "F": curve,
                "F_normalized": normalized,
            }
        ),
    )
    ctx.archive.write_csv(
        "branch_overlaps.csv",
        pd.DataFrame({"n_i": list(overlaps), "overlap": list(overlaps.values())}),
    )
    ctx.archive.add_metadata(thermal={"F_first": f0, "O0": overlaps[0]})


_RUNNERS: dict[str, Callable[[RunContext], None]] = {
    "solve-relative": run_solve_relative,
    "spectrum-static": run_spectrum_static,
    "spectrum-3d": run_spectrum_3d,
    "spectrum-2body": run_spectrum_2body,
    "spectrum-floquet": run_spectrum_floquet,
    "evolve": run_evolve,
    "optimize": run_optimize,
    "thermal-fidelity": run_thermal_fidelity,
}


def emit_plots(directory: Path, figure_ids: list[str]) -> list[Path]:
    return [emit_plot_script(directory, fid) for fid in figure_ids]


def run(
    config: RunConfig,
    subcommand: str,
    out: Path,
    *,
    tier: Optional[str] = None,
    threads: Optional[int] = None,
    strict: bool = False,
) -> ResultArchive:
    """서브커맨드 하나를 실행하고 아카이브를 돌려줍니다.

    실패하면 이미 쓴 CSV 는 남기고 FAILED 마커를 쓴 뒤 예외를 다시 던집니다.
    """
    if subcommand not in _RUNNERS:
        raise ConfigError(f"unknown subcommand {subcommand!r} (available: {', '.join(SUBCOMMANDS)})")
    unknown = [f for f in config.output.figures if f not in FIGURES]
    if unknown:
        raise ConfigError(f"unknown figure ids {unknown} (available: {', '.join(FIGURES)})")
    archive = ResultArchive(Path(out), config)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("error" if strict else "always", ConvergenceWarning)
            ctx = RunContext.create(config, archive, tier=tier, threads=threads)
            logger.info(
                "run %s: %s (%s, tier=%s)", archive.run_id, subcommand, ctx.pair.label, ctx.tier
            )
            _RUNNERS[subcommand](ctx)
        notes = [str(w.message) for w in caught if issubclass(w.category, ConvergenceWarning)]
        for note in notes:
            logger.warning("convergence: %s", note)
        archive.add_metadata(
            tier=ctx.tier,
            species={"label": ctx.pair.label, "r_star_nm": ctx.pair.r_star_m * 1e9},
            e_star_over_h_hz=ctx.units.frequency_unit_hz,
            convergence_warnings=notes,
            cache={"hits": ctx.cache.hits, "misses": ctx.cache.misses} if ctx.cache else None,
        )
        for fid in config.output.figures:
            try:
                archive.artifacts.append(emit_plot_script(archive.directory, fid).name)
            except ConfigError as e:
                # 다른 서브커맨드가 만드는 CSV 를 요구하는 그림
                logger.info("plot %s skipped for %s: %s", fid, subcommand, e)
    except BaseException as e:
        archive.mark_failed(subcommand, e)
        raise
    archive.finalize(subcommand)
    return archive
