"""조화진동자 해석 공식: 에너지, 위치 모멘트 행렬, 고유함수."""

from __future__ import annotations

import math

import numpy as np

from atomion_dw.core.errors import DomainError


def ho_energies(n_states: int, omega: float) -> np.ndarray:
    return (np.arange(int(n_states), dtype=float) + 0.5) * float(omega)


def ho_length(mass: float, omega: float) -> float:
    """sqrt(ħ/(mω)) (ħ = 1)."""
    if mass <= 0 or omega <= 0:
        raise DomainError(f"HO needs mass > 0 and omega > 0, got {mass!r}, {omega!r}")
    return 1.0 / math.sqrt(mass * omega)


def _position_operator(size: int, mass: float, omega: float) -> np.ndarray:
    ladder = np.diag(np.sqrt(np.arange(1, size, dtype=float)), k=1)
    return ho_length(mass, omega) / math.sqrt(2.0) * (ladder + ladder.T)


def ho_position_moments(
    n_states: int, mass: float, omega: float, max_power: int = 4
) -> dict[int, np.ndarray]:
    """⟨m|x^p|n⟩ (p = 0..max_power), n_states × n_states.

    행렬 거듭제곱은 절단 오차를 피하려고 n_states + max_power 크기에서
    계산한 뒤 자릅니다.
    """
    n = int(n_states)
    size = n + int(max_power)
    x = _position_operator(size, mass, omega)
    out: dict[int, np.ndarray] = {0: np.eye(n)}
    acc = np.eye(size)
    for p in range(1, int(max_power) + 1):
        acc = acc @ x
        out[p] = acc[:n, :n].copy()
    return out


def ho_wavefunctions(
    n_states: int, mass: float, omega: float, x: np.ndarray
) -> np.ndarray:
    """φ_n(x), 모양 (n_states, len(x)). 안정적인 3항 점화식을 사용합니다."""
    xs = np.asarray(x, dtype=float)
    alpha = 1.0 / ho_length(mass, omega)
    xi = alpha * xs
    out = np.zeros((int(n_states), xs.size))
    if n_states <= 0:
        return out
    out[0] = math.sqrt(alpha) * np.pi ** (-0.25) * np.exp(-0.5 * xi * xi)
    if n_states > 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(2, int(n_states)):
        out[n] = math.sqrt(2.0 / n) * xi * out[n - 1] - math.sqrt((n - 1) / n) * out[
            n - 2
        ]
    return out
