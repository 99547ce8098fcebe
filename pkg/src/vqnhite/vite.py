"""Baseline variational imaginary-time evolution (McLachlan linear system + Euler)."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from . import hadamard
from .errors import SingularSystemError
from .oracle import ite_trajectory, fidelity
from .pauli import PauliSum
from .statevector import (
    AnsatzCircuit,
    apply_pauli_sum,
    derivative_circuit_states,
    initial_plus_state,
    parameter_shift_tangents,
    run_circuit,
    tangent_vectors,
)
from .trace import FidelityTrace, beta_grid

MODES = ("exact", "hadamard")


@dataclass(frozen=True)
class EvolutionConfig:
    dbeta: float = 0.1
    beta_max: float = 6.0
    ridge: float = 1e-4
    mode: str = "exact"
    shots: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.dbeta <= 0:
            raise ValueError("dbeta must be positive")
        if self.beta_max < self.dbeta:
            raise ValueError("beta_max must be at least dbeta")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.shots < 0:
            raise ValueError("shots must be non-negative")

    def grid(self) -> np.ndarray:
        return beta_grid(self.dbeta, self.beta_max)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LinearSystem:
    M: np.ndarray
    C: np.ndarray


def compute_M(ansatz: AnsatzCircuit, theta, initial=None, mode="exact", shots=0, seed=0) -> np.ndarray:
    """``M_jk = sum_pq Re(a*_jp a_kq <U_jp|U_kq>)`` over the derivative circuits."""
    psi0 = initial_plus_state(ansatz.n_qubits) if initial is None else initial
    if mode == "hadamard":
        return hadamard.vite_M_circuits(ansatz, theta, shots, seed, psi0)
    _, states, coeffs, params = derivative_circuit_states(ansatz, theta, psi0)
    overlaps = (states.conj() @ states.T) * np.outer(coeffs.conj(), coeffs)
    agg = np.zeros((ansatz.n_params, len(coeffs)))
    agg[params, np.arange(len(coeffs))] = 1.0
    M = agg @ overlaps.real @ agg.T
    return 0.5 * (M + M.T)


def compute_M_direct(ansatz: AnsatzCircuit, theta, initial=None) -> np.ndarray:
    """``Re <d_j phi|d_k phi>`` from shift-rule tangents (second, independent path)."""
    psi0 = initial_plus_state(ansatz.n_qubits) if initial is None else initial
    d = parameter_shift_tangents(ansatz, theta, psi0)
    return (d.conj() @ d.T).real


def compute_C(ansatz: AnsatzCircuit, theta, H: PauliSum, initial=None, mode="exact", shots=0, seed=0) -> np.ndarray:
    """``C_j = -Re <phi|H|d_j phi>``."""
    if H.n_qubits != ansatz.n_qubits:
        raise ValueError("Hamiltonian and ansatz act on different qubit counts")
    psi0 = initial_plus_state(ansatz.n_qubits) if initial is None else initial
    if mode == "hadamard":
        return hadamard.vite_C_circuits(ansatz, theta, H, shots, seed, psi0)
    phi, dphi = tangent_vectors(ansatz, theta, psi0)
    return -(apply_pauli_sum(H, phi).conj() @ dphi.T).real


def solve_update(system: LinearSystem, dbeta: float, ridge: float = 1e-4) -> np.ndarray:
    """Euler increment ``(M + ridge I)^-1 C dbeta``."""
    M = np.asarray(system.M, dtype=float)
    C = np.asarray(system.C, dtype=float)
    if ridge == 0:
        w = np.linalg.eigvalsh(M)
        if w[0] <= 1e-12 * max(1.0, abs(w[-1])):
            raise SingularSystemError(
                f"metric is numerically singular (smallest eigenvalue {w[0]:.3e}); use a positive ridge",
                float(w[0]),
            )
    A = M + ridge * np.eye(M.shape[0])
    return scipy.linalg.solve(A, C, assume_a="sym") * dbeta


def vite_evolve(
    config: EvolutionConfig,
    ansatz: AnsatzCircuit,
    H: PauliSum,
    psi0: np.ndarray | None = None,
    sample: int = 0,
    snapshots: bool = False,
) -> FidelityTrace:
    """Evolve ``theta`` from zero and record fidelity/energy at every grid point."""
    psi0 = initial_plus_state(ansatz.n_qubits) if psi0 is None else np.asarray(psi0, dtype=complex)
    grid = config.grid()
    exact = ite_trajectory(H, psi0, grid)
    theta = np.zeros(ansatz.n_params)
    trace = FidelityTrace(metadata={"method": "vite", "config": config.to_dict()})
    for step, beta in enumerate(grid):
        seed = (config.seed, step)
        system = LinearSystem(
            compute_M(ansatz, theta, psi0, config.mode, config.shots, seed),
            compute_C(ansatz, theta, H, psi0, config.mode, config.shots, seed),
        )
        theta = theta + solve_update(system, config.dbeta, config.ridge)
        phi = run_circuit(ansatz, theta, psi0)
        energy = float(np.vdot(phi, apply_pauli_sum(H, phi)).real)
        trace.add(beta, "vite", sample, fidelity(exact[step], phi), energy)
        if snapshots:
            trace.snapshots.append((float(beta), theta.copy()))
    return trace


def vite_continuum(
    config: EvolutionConfig,
    ansatz: AnsatzCircuit,
    H: PauliSum,
    psi0: np.ndarray | None = None,
    rtol: float = 1e-11,
    atol: float = 1e-12,
) -> np.ndarray:
    """``theta(beta_max)`` of the same ridge-regularized flow, integrated to high accuracy.

    Reference for step-size convergence studies of :func:`vite_evolve`; the
    adaptive integrator stands in for the ``dbeta -> 0`` limit.
    """
    psi0 = initial_plus_state(ansatz.n_qubits) if psi0 is None else np.asarray(psi0, dtype=complex)
    beta_end = float(config.grid()[-1])

    def rhs(_beta, theta):
        system = LinearSystem(compute_M(ansatz, theta, psi0), compute_C(ansatz, theta, H, psi0))
        return solve_update(system, 1.0, config.ridge)

    sol = solve_ivp(rhs, (0.0, beta_end), np.zeros(ansatz.n_params), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"reference integration failed: {sol.message}")
    return sol.y[:, -1]
