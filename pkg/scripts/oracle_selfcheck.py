from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

# 프로젝트 루트의 `.env`를 자동 로드합니다 (ATOMION_* 설정).
try:
    import dotenv  # type: ignore

    dotenv.load_dotenv(override=True)
except Exception:
    pass

from atomion_dw.physics.floquet_micromotion import PaulTrapParams, secular_params
from atomion_dw.physics.qdt_numerov import ShortRangePhases, merge_parities, solve_1d
from atomion_dw.physics.species_units import SpeciesPair, characteristic_scales
from atomion_dw.physics.static_spectrum import clebsch_coeff


@dataclass
class Result:
    name: str
    status: str  # PASS | FAIL | SKIP
    detail: str = ""


def _bool_env(name: str, default: str = "false") -> bool:
    return (os.getenv(name, default) or "").lower().strip() in {"1", "true", "yes", "y"}


def _guarded(name: str, fn: Callable[[], Result]) -> Result:
    try:
        t0 = time.time()
        result = fn()
        result.detail = f"{result.detail} ({time.time() - t0:.2f}s)".strip()
        return result
    except Exception as e:
        return Result(name, "FAIL", f"{type(e).__name__}: {e}")


def _check_scales() -> Result:
    rows = []
    ok = True
    for atom, alpha, r_ref, e_ref in (("Rb87", 319.0, 306.0, 935.0), ("Li7", 164.0, 75.0, 133e3)):
        pair = SpeciesPair.from_names(atom, "Yb171+", polarizability_au=alpha)
        s = characteristic_scales(pair)
        ok &= abs(s.r_star_nm / r_ref - 1) < 0.01 and abs(s.e_star_over_h_hz / e_ref - 1) < 0.01
        rows.append(f"{atom}: R*={s.r_star_nm:.1f} nm, E*/h={s.e_star_over_h_hz:.4g} Hz")
    return Result("characteristic scales", "PASS" if ok else "FAIL", "; ".join(rows))


def _check_secular() -> Result:
    w70, _ = secular_params(PaulTrapParams(a=0.0, q=0.4, drive=2 * math.pi * 70.5))
    w967, _ = secular_params(PaulTrapParams(a=0.0, q=0.4, drive=2 * math.pi * 967.0))
    f70, f967 = w70 / (2 * math.pi), w967 / (2 * math.pi)
    ok = abs(f70 - 9.97) < 0.02 and abs(f967 - 137.0) < 0.5
    return Result("secular frequency", "PASS" if ok else "FAIL", f"{f70:.3f} kHz, {f967:.2f} kHz")


def _check_angular() -> Result:
    # Y_l0 = sqrt((2l+1)/4π) P_l(cos θ), Gauss-Legendre 는 다항식에 대해 정확
    x, w = np.polynomial.legendre.leggauss(40)
    worst = 0.0
    for l in range(9):
        for lp in range(9):
            norm = 0.5 * math.sqrt((2 * l + 1) * (2 * lp + 1))
            for j in (2, 4):
                ref = norm * float(np.sum(w * x**j * special.eval_legendre(l, x) * special.eval_legendre(lp, x)))
                worst = max(worst, abs(ref - clebsch_coeff(l, lp, j)))
    return Result("angular factors l<=8", "PASS" if worst < 1e-10 else "FAIL", f"max error {worst:.2e}")


def _check_ho_limit() -> Result:
    omega = 1.0
    even, odd = solve_1d(ShortRangePhases(), 1.0, omega, n_states=8, interacting=False)
    basis = merge_parities(even, odd)
    exact = (np.arange(basis.size) + 0.5) * omega
    err = float(np.abs(basis.energies / exact - 1.0).max())
    return Result("harmonic limit 1D", "PASS" if err < 1e-8 else "FAIL", f"max relative error {err:.2e}")


def _check_static_rate() -> Result:
    if not _bool_env("ATOMION_RUN_SLOW"):
        return Result("static J at 900 nm", "SKIP", "ATOMION_RUN_SLOW 미설정")
    from atomion_dw.physics.species_units import UnitSystem
    from atomion_dw.physics.static_spectrum import StaticModel

    pair = SpeciesPair.from_names("Rb87", "Yb171+", polarizability_au=319.0)
    units = UnitSystem.for_pair(pair)
    omega_a = units.angular_frequency(1800.0)
    phases = ShortRangePhases(-math.pi / 4, math.pi / 4)
    even, odd = solve_1d(phases, pair.atom_mass_factor, omega_a, n_states=45)
    model = StaticModel(merge_parities(even, odd))
    e, v, p = model.diagonalize(units.length(900e-9), 30)
    trap = model.bound_weight(v) <= 0.5
    j_hz = units.energy_hz(e[trap & (p < 0)][0] - e[trap & (p > 0)][0])
    ok = abs(j_hz / 56.0 - 1) < 0.15
    return Result("static J at 900 nm", "PASS" if ok else "FAIL", f"J/h = {j_hz:.1f} Hz")


def main() -> int:
    checks = [
        ("characteristic scales", _check_scales),
        ("secular frequency", _check_secular),
        ("angular factors l<=8", _check_angular),
        ("harmonic limit 1D", _check_ho_limit),
        ("static J at 900 nm", _check_static_rate),
    ]
    results = [_guarded(name, fn) for name, fn in checks]

    print("== 자체 점검 결과 ==")
    for r in results:
        print(f"[{r.status}] {r.name}: {r.detail}")

    failed = [r for r in results if r.status == "FAIL"]
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
