from __future__ import annotations

import math

import numpy as np
import pytest

from atomion_dw.core.errors import SolverError
from atomion_dw.physics.tracking import (
    build_sweep,
    detect_avoided_crossings,
    landau_zener_probability,
    track_levels,
    tunnelling_rate,
)


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _diabatic_crossing():
    """E_a = d, E_b = 5 - d 가 d = 2.5 에서 결합 없이 교차."""
    d = [4.0, 3.0, 2.0, 1.0]
    energies, vectors = [], []
    for x in d:
        ea, eb = x, 5.0 - x
        if eb < ea:
            energies.append([eb, ea])
            vectors.append(np.array([[0.0, 1.0], [1.0, 0.0]]))
        else:
            energies.append([ea, eb])
            vectors.append(np.eye(2))
    return d, np.array(energies), np.array(vectors)


def _avoided_crossing(delta: float = 0.05):
    d = 2.5 + 0.05 * np.arange(-10, 11)
    energies, vectors = [], []
    for x in d:
        h = np.array([[x - 2.5, delta], [delta, 2.5 - x]])
        e, v = np.linalg.eigh(h)
        energies.append(e)
        vectors.append(v)
    return d, np.array(energies), np.array(vectors)


def test_tracks_follow_character_through_sharp_crossing():
    d, e, v = _diabatic_crossing()
    sweep = build_sweep(d, e, v)
    assert sweep.annotations == []
    np.testing.assert_allclose(sweep.track_energies(0), [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(sweep.track_energies(1), [4.0, 3.0, 2.0, 1.0])


def test_sweep_is_sorted_by_decreasing_separation():
    d, e, v = _diabatic_crossing()
    sweep = build_sweep(d[::-1], e[::-1], v[::-1])
    assert list(sweep.d_values) == [4.0, 3.0, 2.0, 1.0]
    np.testing.assert_allclose(sweep.track_energies(0), [1.0, 2.0, 3.0, 4.0])


def test_unresolved_crossing_is_reported():
    d, e, v = _diabatic_crossing()
    sweep = build_sweep(d, e, v)
    found = detect_avoided_crossings(sweep, 0, [1])
    assert len(found) == 1
    assert found[0].resolved is False
    assert found[0].d_center == pytest.approx(2.5)


def test_rate_is_invalid_after_levels_invert():
    d, e, v = _diabatic_crossing()
    table = tunnelling_rate(build_sweep(d, e, v), (0, 1))
    np.testing.assert_allclose(table.j, [3.0, 1.0, -1.0, -3.0])
    assert list(table.valid) == [True, True, False, False]


def test_resolved_avoided_crossing_gap_and_slope():
    d, e, v = _avoided_crossing(0.05)
    sweep = build_sweep(d, e, v)
    assert sweep.annotations == []
    found = [c for c in detect_avoided_crossings(sweep, 0, [1]) if c.resolved]
    assert len(found) == 1
    assert found[0].d_center == pytest.approx(2.5, abs=1e-9)
    assert found[0].gap == pytest.approx(0.1, rel=1e-6)
    assert found[0].slope == pytest.approx(2.0, rel=1e-6)


def test_half_turn_rotation_is_an_exchange():
    v = np.array([np.eye(2), _rotation(math.pi / 4)])
    order, notes = track_levels(v, np.array([2.0, 1.0]))
    assert {n.track for n in notes} == {0, 1}
    assert all(n.kind == "exchange" for n in notes)
    assert notes[0].overlap == pytest.approx(math.sqrt(0.5))


def test_spread_state_is_lost_and_rate_refuses():
    hadamard = 0.5 * np.array(
        [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=float
    )
    v = np.array([np.eye(4), hadamard])
    e = np.array([[0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 2.0, 3.0]])
    sweep = build_sweep([2.0, 1.0], e, v)
    assert any(a.kind == "lost" for a in sweep.annotations)
    with pytest.raises(SolverError):
        tunnelling_rate(sweep, (0, 1))


def test_rate_near_annotation_is_invalid():
    d = [3.0, 2.0, 1.0]
    v = np.array([np.eye(2), np.eye(2), _rotation(math.pi / 4)])
    e = np.array([[0.0, 1.0]] * 3)
    table = tunnelling_rate(build_sweep(d, e, v), (0, 1), window=0)
    assert list(table.valid) == [True, True, False]


def test_landau_zener_limits():
    assert landau_zener_probability(0.0, 1.0, 1.0) == pytest.approx(1.0)
    assert landau_zener_probability(1.0, 1.0, 0.0) == 0.0
    slow = landau_zener_probability(0.1, 2.0, 0.01)
    fast = landau_zener_probability(0.1, 2.0, 1.0)
    assert 0.0 <= slow < fast <= 1.0
    assert fast == pytest.approx(math.exp(-math.pi * 0.01 / 4.0))
