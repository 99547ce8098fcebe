"""Ground truth: exact imaginary-time evolution, fidelity and finite differences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractError, DegeneracyError
from .pauli import DENSE_QUBIT_LIMIT, PauliSum, to_dense


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def spectral(H: PauliSum, limit: int = DENSE_QUBIT_LIMIT) -> SpectralDecomposition:
    if not H.is_hermitian():
        raise ValueError("spectral decomposition needs a Hermitian operator")
    w, V = np.linalg.eigh(to_dense(H, limit=limit))
    return SpectralDecomposition(w, V)


def exact_ite(H: PauliSum | SpectralDecomposition, psi0: np.ndarray, beta: float) -> np.ndarray:
    """Normalized ``exp(-H beta)|psi0>``.

    The propagator is shifted by the ground energy before exponentiation, so all
    weights are at most 1 and nothing overflows.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    sd = H if isinstance(H, SpectralDecomposition) else spectral(H)
    V = sd.eigenvectors
    c = V.conj().T @ np.asarray(psi0, dtype=complex)
    c = c * np.exp(-(sd.eigenvalues - sd.eigenvalues[0]) * beta)
    out = V @ c
    norm = np.linalg.norm(out)
    if norm == 0 or not np.isfinite(norm):
        raise DegeneracyError(f"evolved state has norm {norm} at beta={beta}")
    return out / norm


def ite_trajectory(H: PauliSum, psi0: np.ndarray, betas) -> np.ndarray:
    """Rows are :func:`exact_ite` at each beta (one diagonalization)."""
    sd = spectral(H)
    return np.array([exact_ite(sd, psi0, b) for b in betas])


def fidelity(a: np.ndarray, b: np.ndarray, tol: float = 1e-6) -> float:
    """``|<a|b>|^2`` for normalized states."""
    a = np.asarray(a)
    b = np.asarray(b)
    for name, v in (("first", a), ("second", b)):
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > tol:
            raise ContractError(f"{name} state has norm {nrm:.3g}, expected 1")
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def finite_diff(fn: Callable[[np.ndarray], np.ndarray | float], x, h: float = 1e-5) -> np.ndarray:
    """Central-difference derivative of ``fn`` along every coordinate of ``x``.

    Output has shape ``(len(x),) + shape(fn(x))``.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    rows = []
    for k in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        rows.append((np.asarray(fn(xp)) - np.asarray(fn(xm))) / (2 * h))
    return np.array(rows)
