"""Dense state vectors, the hardware-efficient RY/CZ ansatz and its derivative circuits.

States are plain ``complex128`` numpy arrays of length ``2**n``; qubit 0 is the
most significant bit of the amplitude index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .pauli import PauliString, PauliSum

LAYOUTS = {
    "nn": "nearest-neighbor",
    "nearest-neighbor": "nearest-neighbor",
    "all": "all-to-all",
    "all-to-all": "all-to-all",
}


class RY(NamedTuple):
    qubit: int
    param: int


class CZ(NamedTuple):
    q1: int
    q2: int


Gate = RY | CZ


class DerivativeTerm(NamedTuple):
    """One term ``a = r e^{i phase}`` with generator ``u`` of ``dU_j/dtheta_j = sum a U_j u``."""

    r: float
    phase: float
    generator: PauliString

    @property
    def a(self) -> complex:
        return self.r * complex(math.cos(self.phase), math.sin(self.phase))


def n_qubits_of(psi: np.ndarray) -> int:
    dim = psi.shape[-1]
    n = dim.bit_length() - 1
    if n < 1 or (1 << n) != dim:
        raise ValueError(f"state length {dim} is not a power of two >= 2")
    return n


def initial_plus_state(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one qubit")
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)


def basis_state(bits: str | Sequence[int]) -> np.ndarray:
    bits = [int(b) for b in bits]
    out = np.zeros(1 << len(bits), dtype=complex)
    out[int("".join(map(str, bits)), 2)] = 1.0
    return out


@dataclass(frozen=True)
class AnsatzCircuit:
    """Layers of RY rotations separated by CZ entangling layers.

    ``depth`` blocks of (RY layer, CZ layer) are followed by a closing RY layer,
    so ``n_params == n_qubits * (depth + 1)``. With an even depth the CZ layers
    cancel and the circuit is the identity at ``theta = 0``.
    """

    layout: str
    n_qubits: int
    depth: int
    gates: tuple[Gate, ...]
    n_params: int

    @classmethod
    def build(cls, n_qubits: int, layout: str = "nn", depth: int = 2) -> AnsatzCircuit:
        if layout not in LAYOUTS:
            raise ValueError(f"unknown layout {layout!r}; use one of {sorted(LAYOUTS)}")
        if n_qubits < 1 or depth < 0:
            raise ValueError("need n_qubits >= 1 and depth >= 0")
        layout = LAYOUTS[layout]
        if layout == "nearest-neighbor":
            pairs = [(q, q + 1) for q in range(n_qubits - 1)]
        else:
            pairs = [(a, b) for a in range(n_qubits) for b in range(a + 1, n_qubits)]
        gates: list[Gate] = []
        p = 0
        for block in range(depth + 1):
            for q in range(n_qubits):
                gates.append(RY(q, p))
                p += 1
            if block < depth:
                gates.extend(CZ(a, b) for a, b in pairs)
        return cls(layout, n_qubits, depth, tuple(gates), p)

    def rotation(self, j: int) -> RY:
        for g in self.gates:
            if isinstance(g, RY) and g.param == j:
                return g
        raise IndexError(f"parameter index {j} out of range [0, {self.n_params})")

    def decomposition(self, j: int) -> tuple[DerivativeTerm, ...]:
        """Derivative terms of gate j; RY(t) = exp(-i t Y / 2) gives a = -i/2, u = Y."""
        g = self.rotation(j)
        return (DerivativeTerm(0.5, -math.pi / 2, PauliString.from_sparse(self.n_qubits, {g.qubit: "Y"})),)

    def entangling_pairs(self) -> list[tuple[int, int]]:
        return sorted({(g.q1, g.q2) for g in self.gates if isinstance(g, CZ)})


def _check(ansatz: AnsatzCircuit, theta, psi) -> tuple[np.ndarray, np.ndarray]:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.n_params,):
        raise ValueError(f"expected {ansatz.n_params} parameters, got shape {theta.shape}")
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (1 << ansatz.n_qubits,):
        raise ValueError(f"state of length {psi.shape} does not match {ansatz.n_qubits} qubits")
    return theta, psi


def apply_gate(states: np.ndarray, n: int, gate: Gate, theta: np.ndarray) -> None:
    """Apply one ansatz gate in place to a ``(K, 2**n)`` block."""
    if isinstance(gate, RY):
        kernels.impl.apply_ry(states, n, gate.qubit, float(theta[gate.param]))
    else:
        kernels.impl.apply_cz(states, n, gate.q1, gate.q2)


def run_circuit(ansatz: AnsatzCircuit, theta, psi: np.ndarray) -> np.ndarray:
    theta, psi = _check(ansatz, theta, psi)
    block = psi.reshape(1, -1).copy()
    for g in ansatz.gates:
        apply_gate(block, ansatz.n_qubits, g, theta)
    return block[0]


def derivative_circuit_states(ansatz: AnsatzCircuit, theta, psi: np.ndarray):
    """All circuit states with one generator inserted, in a single sweep.

    Returns ``(phi, states, coeffs, params)``: ``phi = U(theta)psi``; row ``t`` of
    ``states`` is the circuit with generator ``t`` inserted in front of its gate;
    ``coeffs[t]`` is that term's ``a`` and ``params[t]`` its parameter index.
    """
    theta, psi = _check(ansatz, theta, psi)
    n = ansatz.n_qubits
    terms = [(j, t) for j in range(ansatz.n_params) for t in ansatz.decomposition(j)]
    row_of = {}
    block = np.zeros((1 + len(terms), psi.size), dtype=complex)
    block[0] = psi
    active = 1
    for g in ansatz.gates:
        if isinstance(g, RY):
            for t in ansatz.decomposition(g.param):
                x, ph, ny = t.generator.masks()
                block[active] = kernels.impl.apply_pauli(block[:1], x, ph, ny)[0]
                row_of[(g.param, t)] = active
                active += 1
        apply_gate(block[:active], n, g, theta)
    order = [row_of[(j, t)] for j, t in terms]
    states = block[order]
    coeffs = np.array([t.a for _, t in terms])
    params = np.array([j for j, _ in terms])
    return block[0].copy(), states, coeffs, params


def derivative_states(ansatz: AnsatzCircuit, theta, j: int, psi: np.ndarray) -> list[tuple[complex, np.ndarray]]:
    """Pairs ``(a_{j,k}, U_{j,k}|psi>)`` whose weighted sum is ``d|phi>/dtheta_j``."""
    if not 0 <= j < ansatz.n_params:
        raise IndexError(f"parameter index {j} out of range [0, {ansatz.n_params})")
    _, states, coeffs, params = derivative_circuit_states(ansatz, theta, psi)
    return [(complex(coeffs[t]), states[t]) for t in np.flatnonzero(params == j)]


def tangent_vectors(ansatz: AnsatzCircuit, theta, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(phi, dphi)`` with ``dphi[j] = d|phi>/dtheta_j`` assembled from derivative circuits."""
    phi, states, coeffs, params = derivative_circuit_states(ansatz, theta, psi)
    weights = np.zeros((ansatz.n_params, len(coeffs)), dtype=complex)
    weights[params, np.arange(len(coeffs))] = coeffs
    return phi, weights @ states


def parameter_shift_tangents(ansatz: AnsatzCircuit, theta, psi: np.ndarray) -> np.ndarray:
    """``d|phi>/dtheta_j`` from the exact half-angle shift rule (independent of generators)."""
    theta, psi = _check(ansatz, theta, psi)
    out = np.empty((ansatz.n_params, psi.size), dtype=complex)
    for j in range(ansatz.n_params):
        tp = theta.copy()
        tm = theta.copy()
        tp[j] += math.pi
        tm[j] -= math.pi
        # RY(t + pi) - RY(t - pi) = -2i RY(t) Y = 4 dRY/dt
        out[j] = 0.25 * (run_circuit(ansatz, tp, psi) - run_circuit(ansatz, tm, psi))
    return out


def apply_pauli(P: PauliString, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[-1] != 1 << P.n_qubits:
        raise ValueError("state dimension does not match Pauli string")
    x, ph, ny = P.masks()
    block = np.ascontiguousarray(psi.reshape(-1, psi.shape[-1]))
    return kernels.impl.apply_pauli(block, x, ph, ny).reshape(psi.shape)


def apply_pauli_sum(H: PauliSum, psi: np.ndarray) -> np.ndarray:
    """``H|psi>`` assembled term by term (``psi`` may be a ``(K, dim)`` block)."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[-1] != 1 << H.n_qubits:
        raise ValueError("state dimension does not match operator")
    out = np.zeros_like(psi)
    for c, P in H.items():
        out += c * apply_pauli(P, psi)
    return out


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def expectation(H: PauliSum, psi: np.ndarray) -> float:
    """``<psi|H|psi> / <psi|psi>`` for Hermitian ``H``."""
    return float(inner(psi, apply_pauli_sum(H, psi)).real / inner(psi, psi).real)


def gate_matrix(gate: Gate, n: int, theta) -> np.ndarray:
    """Dense matrix of a single gate on ``n`` qubits (oracle support)."""
    dim = 1 << n
    if isinstance(gate, RY):
        t = float(np.asarray(theta)[gate.param])
        c, s = math.cos(t / 2), math.sin(t / 2)
        ry = np.array([[c, -s], [s, c]], dtype=complex)
        return np.kron(np.kron(np.eye(1 << gate.qubit), ry), np.eye(1 << (n - gate.qubit - 1)))
    idx = np.arange(dim)
    mask = (1 << (n - 1 - gate.q1)) | (1 << (n - 1 - gate.q2))
    return np.diag(np.where((idx & mask) == mask, -1.0, 1.0).astype(complex))


def dense_unitary(ansatz: AnsatzCircuit, theta) -> np.ndarray:
    """Product of per-gate dense matrices, last gate leftmost."""
    U = np.eye(1 << ansatz.n_qubits, dtype=complex)
    for g in ansatz.gates:
        U = gate_matrix(g, ansatz.n_qubits, theta) @ U
    return U
