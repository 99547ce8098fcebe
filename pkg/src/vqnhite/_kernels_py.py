"""Pure-numpy state-vector kernels (fallback for the compiled ``_kernels``).

All gate kernels act in place on a C-contiguous ``complex128`` array of shape
``(K, 2**n)`` holding K independent states. Qubit 0 is the most significant bit.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

NAME = "python"


@lru_cache(maxsize=32)
def _popcount_table(dim: int) -> np.ndarray:
    idx = np.arange(dim, dtype=np.int64)
    return np.array([bin(i).count("1") for i in idx], dtype=np.int64)


def _split(states: np.ndarray, n: int, q: int) -> np.ndarray:
    k = states.shape[0]
    return states.reshape(k, 1 << q, 2, 1 << (n - q - 1))


def apply_1q(states: np.ndarray, n: int, q: int, u: np.ndarray) -> None:
    v = _split(states, n, q)
    a0 = v[:, :, 0, :].copy()
    a1 = v[:, :, 1, :].copy()
    v[:, :, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    v[:, :, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def apply_ry(states: np.ndarray, n: int, q: int, theta: float) -> None:
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    v = _split(states, n, q)
    a0 = v[:, :, 0, :].copy()
    a1 = v[:, :, 1, :]
    v[:, :, 0, :] = c * a0 - s * a1
    v[:, :, 1, :] = s * a0 + c * a1


def apply_y(states: np.ndarray, n: int, q: int) -> None:
    v = _split(states, n, q)
    a0 = v[:, :, 0, :].copy()
    v[:, :, 0, :] = -1j * v[:, :, 1, :]
    v[:, :, 1, :] = 1j * a0


def apply_cz(states: np.ndarray, n: int, q1: int, q2: int) -> None:
    mask = (1 << (n - 1 - q1)) | (1 << (n - 1 - q2))
    idx = np.arange(states.shape[1])
    states[:, (idx & mask) == mask] *= -1


def apply_pauli(states: np.ndarray, x_mask: int, phase_mask: int, n_y: int) -> np.ndarray:
    dim = states.shape[1]
    idx = np.arange(dim)
    parity = _popcount_table(dim)[idx & phase_mask] & 1
    phase = (1j**n_y) * (1 - 2 * parity)
    out = np.empty_like(states)
    out[:, idx ^ x_mask] = states * phase
    return out
