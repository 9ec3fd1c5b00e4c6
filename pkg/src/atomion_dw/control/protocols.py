"""가지(branch)별 초기/목표 상태, overlap 목적함수, 얽힘 프로토콜 보고."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from atomion_dw.control.propagation import (
    ParametricHamiltonian,
    QuantumState,
    Schedule,
    Trajectory,
    propagate,
    reduced_subspace,
)
from atomion_dw.core.errors import DomainError, PreconditionError
from atomion_dw.core.workers import parallel_map
from atomion_dw.physics.twobody_spectrum import TwoBodyModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BranchStates:
    """이온 Fock 준위 n_i 가지: d_start 의 왼쪽 상태와 d_end 의 좌/우 목표."""

    n_i: int
    initial_left: np.ndarray
    target_left: np.ndarray
    target_right: np.ndarray


@dataclass(eq=False)
class ProtocolSetup:
    ham: ParametricHamiltonian
    branches: list[BranchStates]
    subspace: Optional[np.ndarray] = None
    captured: dict[int, float] = field(default_factory=dict)

    def branch(self, n_i: int) -> BranchStates:
        for b in self.branches:
            if b.n_i == n_i:
                return b
        raise PreconditionError(f"no branch for ion level {n_i}")


def branch_states(
    model: TwoBodyModel, d_start: float, d_end: float, n_i_max: int = 1
) -> list[BranchStates]:
    """|L, n_i⟩(d_start) 와 |L/R, n_i⟩(d_end). d_end 에서 비국소화되면 DomainError."""
    out = []
    for n_i in range(int(n_i_max) + 1):
        left0, _ = model.localized_pair(d_start, n_i)
        left_t, right_t = model.localized_pair(d_end, n_i)
        out.append(BranchStates(n_i, left0, left_t, right_t))
    return out


def prepare_protocol(
    model: TwoBodyModel,
    schedule: Schedule,
    n_i_max: int = 1,
    *,
    subspace_levels: Optional[int] = None,
    subspace_samples: int = 8,
    d_range: Optional[tuple[float, float]] = None,
) -> ProtocolSetup:
    """전개용 해밀토니안과 가지 상태. subspace_levels 가 주어지면 축소 공간 사용.

    축소 공간은 d_range (기본: schedule 이 지나는 d 범위) 에서 표본을 뽑습니다.
    """
    total = schedule.total_time
    d_start = float(schedule(0.0))
    d_end = float(schedule(total))
    branches = branch_states(model, d_start, d_end, n_i_max)
    ham = ParametricHamiltonian.from_model(model)
    if subspace_levels is None:
        return ProtocolSetup(ham=ham, branches=branches)

    if d_range is None:
        d_path = np.array([float(schedule(t)) for t in np.linspace(0.0, total, 401)])
        d_range = (float(d_path.min()), float(d_path.max()))
    lo, hi = d_range
    samples = sorted(set(np.linspace(lo, hi, subspace_samples).tolist()))
    seeds = np.column_stack(
        [v for b in branches for v in (b.initial_left, b.target_left, b.target_right)]
    )
    q = reduced_subspace(ham, samples, int(subspace_levels), extra=seeds)
    captured: dict[int, float] = {}
    reduced = []
    for b in branches:
        vecs = []
        for v in (b.initial_left, b.target_left, b.target_right):
            p = q.T @ v
            captured[b.n_i] = min(captured.get(b.n_i, 1.0), float(p @ p))
            vecs.append(p / np.linalg.norm(p))
        reduced.append(BranchStates(b.n_i, *vecs))
    return ProtocolSetup(ham=ham.restricted(q), branches=reduced, subspace=q, captured=captured)


def evolve_branches(
    setup: ProtocolSetup,
    schedule: Schedule,
    n_i_values: Optional[Sequence[int]] = None,
    *,
    n_steps: int = 2000,
    n_samples: int = 201,
    threads: Optional[int] = None,
) -> dict[int, Trajectory]:
    """각 가지의 |L, n_i⟩ 를 독립적으로 전개합니다."""
    wanted = [b.n_i for b in setup.branches] if n_i_values is None else list(n_i_values)

    def run(n_i: int) -> Trajectory:
        b = setup.branch(n_i)
        return propagate(
            QuantumState(b.initial_left),
            schedule,
            setup.ham,
            n_steps=n_steps,
            n_samples=n_samples,
        )

    return dict(zip(wanted, parallel_map(run, wanted, threads)))


def overlap_objectives(
    trajectories: dict[int, Trajectory], setup: ProtocolSetup
) -> tuple[np.ndarray, np.ndarray]:
    """O_0(t) = |⟨R,0|ψ_{L,0}(t)⟩|², O_1(t) = |⟨L,1|ψ_{L,1}(t)⟩|²."""
    o0 = trajectories[0].overlaps(setup.branch(0).target_right)
    o1 = (
        trajectories[1].overlaps(setup.branch(1).target_left)
        if 1 in trajectories
        else np.full_like(o0, np.nan)
    )
    return np.clip(o0, 0.0, 1.0), np.clip(o1, 0.0, 1.0)


def transfer_overlaps(
    trajectories: dict[int, Trajectory], setup: ProtocolSetup
) -> dict[int, float]:
    """가지별 최종 |⟨R, n_i|ψ_{L,n_i}(T)⟩|²."""
    return {
        n_i: float(min(1.0, traj.final.overlap(setup.branch(n_i).target_right)))
        for n_i, traj in trajectories.items()
    }


def tunnelling_objective(o0_final: float) -> float:
    return max(0.0, 1.0 - float(o0_final))


def entanglement_objective(o0_final: float, o1_final: float) -> float:
    return max(0.0, 2.0 - float(o0_final) - float(o1_final))


def pulse_objective(
    setup: ProtocolSetup,
    schedule: Schedule,
    kind: str,
    *,
    n_steps: int = 2000,
) -> tuple[float, float, float]:
    """(목적함수, O_0(T), O_1(T)). tunnelling 이면 O_1 은 nan."""
    if kind not in ("tunnelling", "entanglement"):
        raise DomainError(f"unknown objective {kind!r} (tunnelling | entanglement)")
    levels = [0] if kind == "tunnelling" else [0, 1]
    traj = evolve_branches(setup, schedule, levels, n_steps=n_steps, n_samples=2, threads=1)
    o0 = traj[0].final.overlap(setup.branch(0).target_right)
    if kind == "tunnelling":
        return tunnelling_objective(o0), o0, math.nan
    o1 = traj[1].final.overlap(setup.branch(1).target_left)
    return entanglement_objective(o0, o1), o0, o1


@dataclass(frozen=True)
class EntanglementReport:
    o0: float
    o1: float
    swapped_o0: float
    swapped_o1: float
    distinguishability: float
    success: bool
    message: str


def protocol_entanglement(
    setup: ProtocolSetup,
    schedule: Schedule,
    *,
    n_steps: int = 2000,
    threads: Optional[int] = None,
) -> EntanglementReport:
    """이온 중첩 상태 준비를 n_i = 0, 1 두 가지의 독립 전개로 흉내냅니다.

    가지 0 은 원자가 오른쪽으로, 가지 1 은 왼쪽에 남아야 합니다.
    """
    if len(setup.branches) < 2:
        raise PreconditionError("entanglement protocol needs ion branches 0 and 1")
    traj = evolve_branches(setup, schedule, [0, 1], n_steps=n_steps, n_samples=2, threads=threads)
    o0_t, o1_t = overlap_objectives(traj, setup)
    o0, o1 = float(o0_t[-1]), float(o1_t[-1])
    s0 = traj[0].final.overlap(setup.branch(0).target_left)
    s1 = traj[1].final.overlap(setup.branch(1).target_right)
    dist = 0.5 * (o0 + o1 - s0 - s1)
    if o0 < 0.5 and o1 < 0.5:
        success = False
        message = f"branches not distinguishable at d_end (O0={o0:.3f}, O1={o1:.3f})"
    else:
        success = min(o0, o1) >= 0.5
        message = "ok" if success else f"one branch failed (O0={o0:.3f}, O1={o1:.3f})"
    logger.info("entanglement protocol: O0=%.4f O1=%.4f (%s)", o0, o1, message)
    return EntanglementReport(
        o0=o0,
        o1=o1,
        swapped_o0=float(s0),
        swapped_o1=float(s1),
        distinguishability=float(dist),
        success=success,
        message=message,
    )


def check_overlap_bounds(values: np.ndarray) -> None:
    v = np.asarray(values, dtype=float)
    if np.any(v < -1e-12) or np.any(v > 1.0 + 1e-12):
        raise DomainError("overlaps must lie in [0, 1]")
