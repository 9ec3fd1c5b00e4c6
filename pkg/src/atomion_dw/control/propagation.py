"""H(d(t)) 아래의 유니터리 시간 전개.

구간마다 중점 d 에서의 해밀토니안을 고유분해해 정확한 지수 연산자를
적용하고, 한 스텝과 두 반 스텝의 결과 차가 허용오차를 넘으면 스텝을 반으로
나눕니다.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

import numpy as np
from scipy import linalg

from atomion_dw.core.errors import DomainError, IntegratorError, PreconditionError

logger = logging.getLogger(__name__)

STEP_TOLERANCE = 1e-9
NORM_TOLERANCE = 1e-8
MAX_HALVINGS = 24


class _HasParametricParts(Protocol):
    def parametric_parts(self) -> tuple[np.ndarray, np.ndarray, float]: ...


class Schedule(Protocol):
    total_time: float

    def __call__(self, t: float) -> float: ...


@dataclass(frozen=True, eq=False)
class ParametricHamiltonian:
    """H(d) = H_0 + Σ_i f_i(d) H_i."""

    h0: np.ndarray
    terms: tuple[tuple[Callable[[float], float], np.ndarray], ...] = ()

    @property
    def dimension(self) -> int:
        return int(self.h0.shape[0])

    def __call__(self, d: float) -> np.ndarray:
        h = self.h0.copy()
        for f, m in self.terms:
            h += f(d) * m
        return h

    @classmethod
    def from_model(cls, model: _HasParametricParts) -> "ParametricHamiltonian":
        """이중 우물 모형: H_fixed + pref (d²/8 I + Z4/(8 d²))."""
        fixed, z4, pref = model.parametric_parts()
        eye = np.eye(fixed.shape[0])
        return cls(
            h0=np.array(fixed, copy=True),
            terms=(
                (lambda d: pref * d * d / 8.0, eye),
                (lambda d: pref / (8.0 * d * d), np.array(z4, copy=True)),
            ),
        )

    def restricted(self, subspace: np.ndarray) -> "ParametricHamiltonian":
        """정규직교 열 Q 로 사영한 Qᵀ H Q."""
        q = subspace
        return ParametricHamiltonian(
            h0=q.T @ self.h0 @ q,
            terms=tuple((f, q.T @ m @ q) for f, m in self.terms),
        )

    def eigh(self, d: float) -> tuple[np.ndarray, np.ndarray]:
        h = self(d)
        return linalg.eigh(0.5 * (h + h.T))


def reduced_subspace(
    ham: ParametricHamiltonian,
    d_samples: Sequence[float],
    n_levels: int,
    *,
    extra: Optional[np.ndarray] = None,
    rank_tol: float = 1e-10,
) -> np.ndarray:
    """표본 d 들의 최저 n_levels 고유벡터 (+extra) 가 펼치는 공간의 정규직교 기저."""
    if not d_samples:
        raise DomainError("need at least one d sample for the subspace")
    blocks = []
    for d in d_samples:
        _, vecs = linalg.eigh(ham(d), subset_by_index=[0, min(n_levels, ham.dimension) - 1])
        blocks.append(vecs)
    if extra is not None:
        cols = np.asarray(extra).reshape(ham.dimension, -1)
        if np.iscomplexobj(cols):
            if float(np.abs(cols.imag).max()) > 1e-12:
                raise PreconditionError("subspace seed vectors must be real")
            cols = cols.real
        blocks.append(cols)
    stacked = np.hstack(blocks)
    u, s, _ = linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(s > rank_tol * s[0]))
    logger.info(
        "reduced subspace: %d samples x %d levels -> rank %d of %d",
        len(d_samples),
        n_levels,
        rank,
        ham.dimension,
    )
    return u[:, :rank]


@dataclass
class QuantumState:
    coefficients: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        self.coefficients = np.asarray(self.coefficients, dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def overlap(self, target: np.ndarray) -> float:
        """|⟨target|ψ⟩|²."""
        return float(abs(np.vdot(target, self.coefficients)) ** 2)

    def project(self, subspace: np.ndarray) -> "QuantumState":
        return QuantumState(subspace.conj().T @ self.coefficients, self.time)

    def lift(self, subspace: np.ndarray) -> "QuantumState":
        return QuantumState(subspace @ self.coefficients, self.time)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    d_values: np.ndarray
    n_steps: int = 0
    n_halvings: int = 0
    metadata: dict[str, float] = field(default_factory=dict)

    @property
    def final(self) -> QuantumState:
        return QuantumState(self.states[-1], float(self.times[-1]))

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def overlaps(self, target: np.ndarray) -> np.ndarray:
        return np.abs(self.states @ np.conj(target)) ** 2


class _Stepper:
    def __init__(self, ham: ParametricHamiltonian, direction: float) -> None:
        self.ham = ham
        self.direction = direction
        self._last_d: Optional[float] = None
        self._last: Optional[tuple[np.ndarray, np.ndarray]] = None

    def step(self, psi: np.ndarray, d: float, h: float) -> np.ndarray:
        if self._last_d != d or self._last is None:
            self._last = self.ham.eigh(d)
            self._last_d = d
        vals, vecs = self._last
        phase = np.exp(-1j * self.direction * vals * h)
        return vecs @ (phase * (vecs.T @ psi))


def propagate(
    initial: QuantumState,
    schedule: Schedule,
    ham: ParametricHamiltonian,
    *,
    n_steps: int = 2000,
    n_samples: int = 201,
    tol: float = STEP_TOLERANCE,
    backward: bool = False,
) -> Trajectory:
    """0 → T (backward=True 이면 T → 0, U† 적용) 로 전개합니다."""
    total = float(schedule.total_time)
    psi = np.asarray(initial.coefficients, dtype=complex).copy()
    if psi.size != ham.dimension:
        raise PreconditionError(
            f"state has {psi.size} components, Hamiltonian has {ham.dimension}"
        )
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps!r}")
    norm0 = float(np.linalg.norm(psi))
    direction = -1.0 if backward else 1.0
    stepper = _Stepper(ham, direction)
    h_nominal = total / n_steps
    sample_at = set(np.unique(np.linspace(0, n_steps, max(2, n_samples)).round().astype(int)))

    def t_of(k: float) -> float:
        return total - k * h_nominal if backward else k * h_nominal

    def advance(state: np.ndarray, t0: float, h: float, depth: int) -> tuple[np.ndarray, int]:
        sgn = -1.0 if backward else 1.0
        d_mid = float(schedule(t0 + sgn * 0.5 * h))
        full = stepper.step(state, d_mid, h)
        d_q1 = float(schedule(t0 + sgn * 0.25 * h))
        d_q3 = float(schedule(t0 + sgn * 0.75 * h))
        if d_q1 == d_mid == d_q3:
            return full, 0
        half = stepper.step(stepper.step(state, d_q1, 0.5 * h), d_q3, 0.5 * h)
        if float(np.linalg.norm(full - half)) <= tol:
            return half, 0
        if depth >= MAX_HALVINGS:
            raise IntegratorError(
                f"step halving did not converge at t={t0:.6g} (h={h:.3g}, d={d_mid:.6g})"
            )
        first, n1 = advance(state, t0, 0.5 * h, depth + 1)
        second, n2 = advance(first, t0 + sgn * 0.5 * h, 0.5 * h, depth + 1)
        return second, n1 + n2 + 1

    times, states, ds = [t_of(0)], [psi.copy()], [float(schedule(t_of(0)))]
    halvings = 0
    for k in range(n_steps):
        psi, n_half = advance(psi, t_of(k), h_nominal, 0)
        halvings += n_half
        if k + 1 in sample_at:
            t = t_of(k + 1)
            times.append(t)
            states.append(psi.copy())
            ds.append(float(schedule(t)))

    drift = abs(float(np.linalg.norm(psi)) - norm0)
    if drift > NORM_TOLERANCE:
        raise IntegratorError(f"norm drift {drift:.3e} exceeds {NORM_TOLERANCE:.0e}")
    logger.debug("propagate: %d steps, %d halvings, norm drift %.2e", n_steps, halvings, drift)
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        d_values=np.array(ds),
        n_steps=n_steps,
        n_halvings=halvings,
        metadata={"norm_drift": drift, "backward": float(backward)},
    )


def spectral_evolution(
    ham: ParametricHamiltonian, d: float, state: QuantumState, t: float
) -> QuantumState:
    """상수 d 에서 Σ c_l e^{-iE_l t} |ψ_l⟩."""
    vals, vecs = ham.eigh(d)
    c = vecs.T @ state.coefficients
    return QuantumState(vecs @ (np.exp(-1j * vals * t) * c), state.time + t)


def two_level_period(splitting: float) -> float:
    """J 로 갈라진 두 준위 사이 완전 진동 주기 2πħ/J."""
    if not splitting > 0:
        raise DomainError(f"splitting must be > 0, got {splitting!r}")
    return 2.0 * math.pi / splitting
