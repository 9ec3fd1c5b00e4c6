"""d 스윕 스펙트럼의 준위 추적과 회피 교차 검출."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Literal, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from atomion_dw.core.errors import DomainError, PreconditionError, SolverError

logger = logging.getLogger(__name__)

DEFAULT_OVERLAP_FLOOR = 0.8
SWAP_THRESHOLD = 0.5


@dataclass(frozen=True)
class CrossingAnnotation:
    """인접 d 사이 추적 overlap 이 floor 아래로 떨어진 지점."""

    d_index: int
    d: float
    track: int
    overlap: float
    kind: Literal["exchange", "lost"]


@dataclass(frozen=True)
class AvoidedCrossing:
    track: int
    partner: int
    d_center: float
    gap: float
    slope: float
    resolved: bool

    def landau_zener(self, d_rate: float) -> float:
        return landau_zener_probability(self.gap, self.slope, d_rate)


def landau_zener_probability(gap: float, slope: float, d_rate: float) -> float:
    """ḋ 로 통과할 때 diabatic 전이 확률 exp(-π Δ² / (2 |α| |ḋ|))."""
    rate = abs(float(slope) * float(d_rate))
    if rate == 0.0:
        return 0.0
    return math.exp(-math.pi * float(gap) ** 2 / (2.0 * rate))


@dataclass(eq=False)
class SpectrumSweep:
    """d (내림차순) 에 대한 고유값/고유벡터와 추적 결과.

    ``order[i, t]`` 는 i 번째 d 에서 트랙 t 에 해당하는 준위 인덱스입니다.
    트랙 번호는 가장 큰 d 에서의 에너지 순서입니다.
    """

    d_values: np.ndarray
    energies: np.ndarray
    vectors: Optional[np.ndarray]
    order: np.ndarray
    parity: Optional[np.ndarray] = None
    labels: list[str] = field(default_factory=list)
    annotations: list[CrossingAnnotation] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def n_tracks(self) -> int:
        return int(self.order.shape[1])

    @property
    def n_d(self) -> int:
        return int(self.d_values.size)

    def track_energies(self, track: int) -> np.ndarray:
        idx = self.order[:, track]
        return self.energies[np.arange(self.n_d), idx]

    def track_vectors(self, track: int) -> np.ndarray:
        if self.vectors is None:
            raise PreconditionError("sweep was built without eigenvectors")
        idx = self.order[:, track]
        return self.vectors[np.arange(self.n_d), :, idx]

    def track_parity(self, track: int) -> Optional[np.ndarray]:
        if self.parity is None:
            return None
        idx = self.order[:, track]
        return self.parity[np.arange(self.n_d), idx]

    def track_of_label(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as e:
            raise DomainError(f"no track labelled {label!r}") from e

    def annotations_for(self, track: int) -> list[CrossingAnnotation]:
        return [a for a in self.annotations if a.track == track]

    def d_index(self, d: float) -> int:
        return int(np.argmin(np.abs(self.d_values - float(d))))


def track_levels(
    vectors: np.ndarray,
    d_values: np.ndarray,
    *,
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR,
) -> tuple[np.ndarray, list[CrossingAnnotation]]:
    """인접 d 간 최대 overlap 전역 매칭으로 트랙을 잇습니다."""
    n_d, _, n_levels = vectors.shape
    order = np.zeros((n_d, n_levels), dtype=int)
    order[0] = np.arange(n_levels)
    notes: list[CrossingAnnotation] = []
    for i in range(1, n_d):
        prev = vectors[i - 1][:, order[i - 1]]
        overlap = np.abs(prev.T @ vectors[i])
        rows, cols = linear_sum_assignment(-overlap)
        order[i, rows] = cols
        matched = overlap[rows, cols]
        for t in np.flatnonzero(matched < overlap_floor):
            top2 = np.sort(overlap[t] ** 2)[-2:].sum()
            kind: Literal["exchange", "lost"] = (
                "exchange" if top2 >= overlap_floor**2 else "lost"
            )
            notes.append(
                CrossingAnnotation(
                    d_index=i,
                    d=float(d_values[i]),
                    track=int(t),
                    overlap=float(matched[t]),
                    kind=kind,
                )
            )
    if notes:
        logger.debug("tracking: %d low-overlap steps", len(notes))
    return order, notes


def build_sweep(
    d_values: Sequence[float],
    energies: np.ndarray,
    vectors: np.ndarray,
    *,
    parity: Optional[np.ndarray] = None,
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR,
    metadata: Optional[dict[str, Any]] = None,
) -> SpectrumSweep:
    """d 를 내림차순으로 정렬하고 추적까지 마친 SpectrumSweep."""
    d = np.asarray(d_values, dtype=float)
    idx = np.argsort(-d, kind="stable")
    d = d[idx]
    e = np.asarray(energies)[idx]
    v = np.asarray(vectors)[idx]
    p = None if parity is None else np.asarray(parity)[idx]
    order, notes = track_levels(v, d, overlap_floor=overlap_floor)
    return SpectrumSweep(
        d_values=d,
        energies=e,
        vectors=v,
        order=order,
        parity=p,
        annotations=notes,
        metadata=dict(metadata or {}),
    )


def _parabola_gap(d: np.ndarray, gap: np.ndarray) -> tuple[float, float, float]:
    """gap² = Δ² + α² (d - d0)² 을 세 점으로 맞춥니다. (d0, Δ, |α|)."""
    a, b, c = np.polyfit(d, gap**2, 2)
    if a <= 0.0:
        i = int(np.argmin(gap))
        return float(d[i]), float(gap[i]), 0.0
    d0 = -b / (2.0 * a)
    delta2 = c - b * b / (4.0 * a)
    return float(d0), math.sqrt(max(delta2, 0.0)), math.sqrt(a)


def detect_avoided_crossings(
    sweep: SpectrumSweep,
    track_id: int,
    partners: Optional[Sequence[int]] = None,
    *,
    swap_threshold: float = SWAP_THRESHOLD,
) -> list[AvoidedCrossing]:
    """트랙 간 간격의 국소 최소 중 고유벡터 성격이 교환되는 지점.

    추적된 두 트랙의 에너지 차가 부호를 바꾸면 d 격자가 교차를 분해하지
    못한 것이므로 resolved=False 로 표시합니다 (parity 가 다르면 진짜 교차).
    """
    d = sweep.d_values
    e_t = sweep.track_energies(track_id)
    par_t = sweep.track_parity(track_id)
    others = [p for p in (partners or range(sweep.n_tracks)) if p != track_id]
    found: list[AvoidedCrossing] = []

    vec_t = sweep.track_vectors(track_id) if sweep.vectors is not None else None
    for p in others:
        e_p = sweep.track_energies(p)
        par_p = sweep.track_parity(p)
        diff = e_t - e_p
        gap = np.abs(diff)

        for i in range(sweep.n_d - 1):
            if diff[i] == 0.0 or np.sign(diff[i]) == np.sign(diff[i + 1]):
                continue
            if par_t is not None and par_p is not None and par_t[i] != par_p[i]:
                continue
            frac = diff[i] / (diff[i] - diff[i + 1])
            found.append(
                AvoidedCrossing(
                    track=track_id,
                    partner=int(p),
                    d_center=float(d[i] + frac * (d[i + 1] - d[i])),
                    gap=float(min(gap[i], gap[i + 1])),
                    slope=float(abs(diff[i + 1] - diff[i]) / abs(d[i + 1] - d[i])),
                    resolved=False,
                )
            )

        if vec_t is None:
            continue
        vec_p = sweep.track_vectors(p)
        for i in range(1, sweep.n_d - 1):
            if not (gap[i] <= gap[i - 1] and gap[i] < gap[i + 1]):
                continue
            if par_t is not None and par_p is not None and par_t[i] != par_p[i]:
                continue
            swap = max(
                abs(float(vec_t[i - 1] @ vec_p[i + 1])),
                abs(float(vec_p[i - 1] @ vec_t[i + 1])),
            )
            if swap <= swap_threshold:
                continue
            d0, delta, slope = _parabola_gap(d[i - 1 : i + 2], gap[i - 1 : i + 2])
            found.append(
                AvoidedCrossing(
                    track=track_id,
                    partner=int(p),
                    d_center=d0,
                    gap=delta,
                    slope=slope,
                    resolved=True,
                )
            )
    found.sort(key=lambda c: -c.d_center)
    return found


@dataclass(frozen=True)
class TunnellingTable:
    d: np.ndarray
    j: np.ndarray
    valid: np.ndarray
    tracks: tuple[int, int]


def tunnelling_rate(
    sweep: SpectrumSweep,
    track_pair: tuple[int, int] = (0, 1),
    *,
    window: int = 1,
) -> TunnellingTable:
    """J(d) = E_e - E_g. 추적 주석 근처(±window)와 역전 구간은 invalid."""
    g, e = track_pair
    lost = [
        a for a in sweep.annotations if a.track in (g, e) and a.kind == "lost"
    ]
    if lost:
        first = lost[0]
        raise SolverError(
            f"tracking lost for track {first.track} at d={first.d:.6g} "
            f"(overlap {first.overlap:.3f})"
        )
    e_g = sweep.track_energies(g)
    e_e = sweep.track_energies(e)
    j = e_e - e_g
    valid = j >= 0.0
    for a in sweep.annotations:
        if a.track in (g, e):
            lo = max(0, a.d_index - window)
            valid[lo : a.d_index + window + 1] = False
    return TunnellingTable(d=sweep.d_values.copy(), j=j, valid=valid, tracks=(g, e))
