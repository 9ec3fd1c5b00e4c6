"""CRAB 최적화: 무작위 주파수 다중 시작 + Nelder-Mead.

기준 램프(계수 0)를 가장 먼저 평가하므로 결과는 기준보다 나빠질 수 없습니다.
d_floor 를 어긴 펄스는 목적함수를 계산하지 않고 10 + 위반 깊이로 벌점을 줍니다.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import pandas as pd
from scipy import optimize

from atomion_dw.control.pulses import DEFAULT_D_FLOOR, DEFAULT_HARMONICS, ControlPulse
from atomion_dw.core.errors import DomainError, OptimizationError
from atomion_dw.core.workers import parallel_map

logger = logging.getLogger(__name__)

FLOOR_PENALTY = 10.0

Objective = Callable[[ControlPulse], float]


@dataclass(frozen=True)
class CrabSettings:
    n_harmonics: int = DEFAULT_HARMONICS
    max_evals: int = 2000
    n_starts: int = 5
    init_scale: float = 0.05
    seed: Optional[int] = None
    d_floor: float = DEFAULT_D_FLOOR
    xatol: float = 1e-6
    fatol: float = 1e-10

    def __post_init__(self) -> None:
        if self.n_harmonics < 1:
            raise DomainError(f"n_harmonics must be >= 1, got {self.n_harmonics!r}")
        if self.n_starts < 1:
            raise DomainError(f"n_starts must be >= 1, got {self.n_starts!r}")
        if self.max_evals < self.n_starts + 1:
            raise DomainError(
                f"max_evals={self.max_evals!r} leaves no budget for {self.n_starts} starts"
            )
        if not self.init_scale > 0:
            raise DomainError(f"init_scale must be > 0, got {self.init_scale!r}")

    @property
    def evals_per_start(self) -> int:
        return (self.max_evals - 1) // self.n_starts


@dataclass
class _StartLog:
    start: int
    randomization: np.ndarray
    values: list[float] = field(default_factory=list)
    best_value: float = math.inf
    best_pulse: Optional[ControlPulse] = None
    message: str = ""


class _BudgetExhausted(Exception):
    pass


@dataclass
class OptimizationResult:
    pulse: ControlPulse
    objective: float
    baseline_objective: float
    start_objectives: list[float]
    trace_start: np.ndarray
    trace_values: np.ndarray

    @property
    def n_evals(self) -> int:
        return int(self.trace_values.size)

    @property
    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.trace_values)

    @property
    def improvement(self) -> float:
        return self.baseline_objective - self.objective

    def trace_frame(self) -> pd.DataFrame:
        """eval_index, start (-1 = 기준 램프), objective, best_so_far."""
        return pd.DataFrame(
            {
                "eval_index": np.arange(self.n_evals),
                "start": self.trace_start,
                "objective": self.trace_values,
                "best_so_far": self.best_so_far,
            }
        )


def _evaluate(objective: Objective, pulse: ControlPulse) -> float:
    violation = pulse.floor_violation()
    if violation > 0:
        return FLOOR_PENALTY + violation
    value = float(objective(pulse))
    if not math.isfinite(value):
        raise OptimizationError(f"objective returned non-finite value {value!r}")
    return value


def _run_start(
    objective: Objective,
    template: ControlPulse,
    settings: CrabSettings,
    log: _StartLog,
) -> _StartLog:
    n_coef = 2 * log.randomization.size
    x0 = np.zeros(n_coef)
    simplex = np.vstack([x0, x0 + settings.init_scale * np.eye(n_coef)])
    budget = settings.evals_per_start

    def fun(x: np.ndarray) -> float:
        if len(log.values) >= budget:
            raise _BudgetExhausted
        pulse = template.with_coefficients(x, log.randomization)
        value = _evaluate(objective, pulse)
        log.values.append(value)
        if value < log.best_value:
            log.best_value = value
            log.best_pulse = pulse
        return value

    try:
        res = optimize.minimize(
            fun,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "maxfev": budget,
                "xatol": settings.xatol,
                "fatol": settings.fatol,
            },
        )
        log.message = str(res.message)
    except _BudgetExhausted:
        log.message = "evaluation budget exhausted"
    logger.info(
        "CRAB start %d: best %.6g after %d evaluations (%s)",
        log.start,
        log.best_value,
        len(log.values),
        log.message,
    )
    return log


def crab_optimize(
    objective: Objective,
    template: ControlPulse,
    settings: CrabSettings = CrabSettings(),
    *,
    threads: Optional[int] = None,
) -> OptimizationResult:
    """objective(pulse) 를 최소화하는 CRAB 계수를 찾습니다.

    시작마다 r_k ~ U[-0.5, 0.5] 를 새로 뽑고 계수 0 에서 Nelder-Mead 를 돌립니다.
    시드가 같으면 스레드 수와 무관하게 같은 궤적(trace)이 나옵니다.
    """
    template = ControlPulse.from_baseline(
        template.baseline,
        settings.n_harmonics,
        d_floor=settings.d_floor,
        seed=settings.seed,
    )
    baseline_value = _evaluate(objective, template)
    logger.info("CRAB baseline objective %.6g", baseline_value)

    children = np.random.SeedSequence(settings.seed).spawn(settings.n_starts)
    logs = [
        _StartLog(
            start=k,
            randomization=np.random.default_rng(child).uniform(
                -0.5, 0.5, settings.n_harmonics
            ),
        )
        for k, child in enumerate(children)
    ]
    logs = parallel_map(lambda lg: _run_start(objective, template, settings, lg), logs, threads)

    best_value, best_pulse = baseline_value, template
    for lg in logs:
        if lg.best_pulse is not None and lg.best_value < best_value:
            best_value, best_pulse = lg.best_value, lg.best_pulse
    if best_value >= FLOOR_PENALTY:
        raise OptimizationError(
            f"baseline and all {settings.n_starts} CRAB starts violate d_floor={settings.d_floor}"
        )

    trace_values = np.concatenate([[baseline_value]] + [np.asarray(lg.values) for lg in logs])
    trace_start = np.concatenate(
        [[-1]] + [np.full(len(lg.values), lg.start, dtype=int) for lg in logs]
    ).astype(int)
    logger.info(
        "CRAB done: best %.6g (baseline %.6g), %d evaluations",
        best_value,
        baseline_value,
        trace_values.size,
    )
    return OptimizationResult(
        pulse=best_pulse,
        objective=best_value,
        baseline_objective=baseline_value,
        start_objectives=[lg.best_value for lg in logs],
        trace_start=trace_start,
        trace_values=trace_values,
    )
