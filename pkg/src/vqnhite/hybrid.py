"""Quantum-neural hybrid imaginary-time evolution.

The variational state is ``|Phi> = C f U(theta)|0>`` with ``f`` the diagonal
network operator and ``C = <phi~|phi~>^{-1/2}``. Parameters are the circuit
angles followed by the flattened network weights, ``x = [theta | phi]``.

Evolution has two stages: gradient descent on the infidelity against the
exact state at ``beta = dbeta``, then Euler steps of the McLachlan system built
from the hybrid metric ``Re<d_a Phi|d_b Phi>`` and force ``-Re<d_a Phi|H|Phi>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import hadamard
from .errors import DegeneracyError, DivergenceError
from .neural import MLPParams, init_params, nn_jacobian
from .oracle import exact_ite, fidelity, spectral
from .pauli import PauliSum, taylor_ite_pauli
from .statevector import AnsatzCircuit, apply_pauli_sum, initial_plus_state, tangent_vectors
from .trace import FidelityTrace
from .vite import EvolutionConfig, LinearSystem, solve_update

TARGET_MODES = ("exact", "taylor-target")


@dataclass(frozen=True)
class HybridParams:
    theta: np.ndarray
    nn: MLPParams

    @property
    def size(self) -> int:
        return self.theta.size + self.nn.size

    def flatten(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.theta, dtype=float), self.nn.flatten()])

    @classmethod
    def unflatten(cls, vec: np.ndarray, n_theta: int, widths) -> HybridParams:
        vec = np.asarray(vec, dtype=float)
        return cls(vec[:n_theta].copy(), MLPParams.unflatten(vec[n_theta:], widths))

    def with_flat(self, vec: np.ndarray) -> HybridParams:
        return HybridParams.unflatten(vec, self.theta.size, self.nn.widths)


@dataclass(frozen=True)
class HybridState:
    raw: np.ndarray  # f U|0>, unnormalized
    norm_const: float

    @property
    def normalized(self) -> np.ndarray:
        return self.norm_const * self.raw


class DVector(NamedTuple):
    """Half-gradients of ``<phi~|phi~>`` with respect to circuit and network parameters."""

    theta: np.ndarray
    phi: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return np.concatenate([self.theta, self.phi])


@dataclass
class _Linearization:
    """Everything the block formulas need at one parameter point."""

    phi: np.ndarray  # U|0>
    dphi: np.ndarray  # (N_p, dim) d/dtheta_j U|0>
    f: np.ndarray  # (dim,)
    df: np.ndarray  # (N_f, dim)
    norm: float = field(init=False)
    C: float = field(init=False)

    def __post_init__(self):
        self.norm = float(np.sum(self.f**2 * np.abs(self.phi) ** 2))
        if not np.isfinite(self.norm) or self.norm <= 0:
            raise DegeneracyError(f"network-modified state has norm^2 {self.norm}")
        self.C = 1.0 / math.sqrt(self.norm)

    @property
    def raw(self) -> np.ndarray:
        return self.f * self.phi


def _linearize(theta, nn: MLPParams, ansatz: AnsatzCircuit, initial=None) -> _Linearization:
    psi0 = initial_plus_state(ansatz.n_qubits) if initial is None else np.asarray(initial, dtype=complex)
    if nn.n_inputs != ansatz.n_qubits:
        raise ValueError("network input width does not match the ansatz qubit count")
    phi, dphi = tangent_vectors(ansatz, theta, psi0)
    f, df = nn_jacobian(nn)
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(df))):
        raise DivergenceError("network output overflowed")
    return _Linearization(phi, dphi, f, df)


def build_hybrid_state(theta, nn: MLPParams, ansatz: AnsatzCircuit, initial=None) -> HybridState:
    lin = _linearize(theta, nn, ansatz, initial)
    return HybridState(lin.raw, lin.C)


def _D(lin: _Linearization) -> DVector:
    w = np.abs(lin.phi) ** 2
    D_phi = lin.df @ (lin.f * w)
    D_theta = (lin.dphi.conj() @ (lin.f**2 * lin.phi)).real
    return DVector(D_theta, D_phi)


def compute_D(theta, nn: MLPParams, ansatz: AnsatzCircuit, initial=None) -> DVector:
    return _D(_linearize(theta, nn, ansatz, initial))


def expectation_energy(theta, nn: MLPParams, H: PauliSum, ansatz: AnsatzCircuit, initial=None) -> float:
    """Ratio of network-weighted Pauli expectations ``sum_j h_j <phi~|P_j|phi~> / <phi~|phi~>``."""
    lin = _linearize(theta, nn, ansatz, initial)
    return _energy(lin, H)


def _energy(lin: _Linearization, H: PauliSum) -> float:
    raw = lin.raw
    return float(np.vdot(raw, apply_pauli_sum(H, raw)).real / lin.norm)


# ------------------------------------------------------------ initialization


def cost_F(theta, nn: MLPParams, ansatz: AnsatzCircuit, target: np.ndarray, initial=None) -> float:
    """Infidelity ``1 - |<target|Phi>|^2``."""
    lin = _linearize(theta, nn, ansatz, initial)
    return 1.0 - min(1.0, abs(np.vdot(target, lin.C * lin.raw)) ** 2)


def _cost_and_grad(lin: _Linearization, target: np.ndarray) -> tuple[float, np.ndarray]:
    D = _D(lin)
    C = lin.C
    overlap = np.vdot(target, lin.raw)  # <psi|phi~>
    d_overlap = np.concatenate([(lin.dphi * lin.f) @ target.conj(), (lin.df * lin.phi) @ target.conj()])
    dC = -(C**3) * D.full
    abs2 = abs(overlap) ** 2
    grad = -2 * C * (dC * abs2 + C * (overlap * d_overlap.conj()).real)
    return 1.0 - C * C * abs2, grad


def cost_gradients(theta, nn: MLPParams, ansatz: AnsatzCircuit, target: np.ndarray, initial=None) -> np.ndarray:
    """Gradient of :func:`cost_F` over ``[theta | phi]``."""
    return _cost_and_grad(_linearize(theta, nn, ansatz, initial), np.asarray(target, dtype=complex))[1]


class InitResult(NamedTuple):
    params: HybridParams
    history: list[float]


def init_optimize(
    theta0,
    nn0: MLPParams,
    ansatz: AnsatzCircuit,
    target: np.ndarray,
    iters: int = 50,
    lr: float = 0.1,
    initial=None,
) -> InitResult:
    """Plain gradient descent ``x <- x - lr * grad F_cost`` for exactly ``iters`` steps.

    ``history`` holds the cost before every step and after the last one.
    """
    target = np.asarray(target, dtype=complex)
    params = HybridParams(np.asarray(theta0, dtype=float).copy(), nn0)
    x = params.flatten()
    history = []
    for it in range(iters + 1):
        p = params.with_flat(x)
        try:
            cost, grad = _cost_and_grad(_linearize(p.theta, p.nn, ansatz, initial), target)
        except (DegeneracyError, DivergenceError) as exc:
            raise DivergenceError(f"initialization diverged at iteration {it}: {exc}", iteration=it) from exc
        if not (np.isfinite(cost) and np.all(np.isfinite(grad))):
            raise DivergenceError(f"non-finite cost at iteration {it}", iteration=it)
        history.append(float(cost))
        if it == iters:
            break
        x = x - lr * grad
    return InitResult(params.with_flat(x), history)


def taylor_target(H: PauliSum, dbeta: float, psi0: np.ndarray) -> np.ndarray:
    """Normalized second-order Taylor-Pauli approximation of ``exp(-H dbeta)|psi0>``."""
    psi = apply_pauli_sum(taylor_ite_pauli(H, dbeta, 2), psi0)
    return psi / np.linalg.norm(psi)


# --------------------------------------------------------- metric and force


class HybridSystem(NamedTuple):
    metric: np.ndarray
    force: np.ndarray
    energy: float


def _metric(lin: _Linearization, D: DVector) -> np.ndarray:
    C2 = lin.C**2
    C4 = C2 * C2
    w = np.abs(lin.phi) ** 2
    Dt, Dp = D
    # phi-phi: C^2 sum_s df_j df_k |phi_s|^2 - C^4 (D_j <f df_k> + D_k <df_j f>) + C^4 D_j D_k
    sum_dfdf = (lin.df * w) @ lin.df.T
    sum_fdf = lin.df @ (lin.f * w)
    pp = C2 * sum_dfdf - C4 * (np.outer(Dp, sum_fdf) + np.outer(sum_fdf, Dp)) + C4 * np.outer(Dp, Dp)
    # theta-phi: C^2 Re<d_j phi|F dF_k|phi> - C^4 (D_j <f df_k> + D_k Re<d_j phi|F^2|phi>) + C^4 D_j D_k
    cross = ((lin.dphi.conj() * lin.f) @ (lin.df * lin.phi).T).real
    dphi_f2_phi = (lin.dphi.conj() @ (lin.f**2 * lin.phi)).real
    tp = C2 * cross - C4 * (np.outer(Dt, sum_fdf) + np.outer(dphi_f2_phi, Dp)) + C4 * np.outer(Dt, Dp)
    # theta-theta: C^2 Re<d_j phi|F^2|d_k phi> - C^4 (D_j Re<phi|F^2|d_k phi> + D_k Re<d_j phi|F^2|phi>) + C^4 D_j D_k
    gram = ((lin.dphi.conj() * lin.f**2) @ lin.dphi.T).real
    tt = C2 * gram - C4 * (np.outer(Dt, dphi_f2_phi) + np.outer(dphi_f2_phi, Dt)) + C4 * np.outer(Dt, Dt)
    n_t = Dt.size
    M = np.empty((n_t + Dp.size, n_t + Dp.size))
    M[:n_t, :n_t] = tt
    M[:n_t, n_t:] = tp
    M[n_t:, :n_t] = tp.T
    M[n_t:, n_t:] = pp
    return 0.5 * (M + M.T)


def _force(lin: _Linearization, D: DVector, H: PauliSum, energy: float) -> np.ndarray:
    C2 = lin.C**2
    H_raw = apply_pauli_sum(H, lin.raw)  # H f|phi>
    # Re<phi|dF_j H|Phi> and Re<d_j phi|F H|Phi>, both with |Phi> = C f|phi>
    phi_term = ((lin.df * lin.phi.conj()) @ H_raw).real
    theta_term = ((lin.dphi.conj() * lin.f) @ H_raw).real
    re_t = -C2 * D.theta * energy + C2 * theta_term
    re_p = -C2 * D.phi * energy + C2 * phi_term
    return -np.concatenate([re_t, re_p])


def hybrid_system(theta, nn: MLPParams, ansatz: AnsatzCircuit, H: PauliSum, initial=None) -> HybridSystem:
    lin = _linearize(theta, nn, ansatz, initial)
    D = _D(lin)
    energy = _energy(lin, H)
    return HybridSystem(_metric(lin, D), _force(lin, D, H, energy), energy)


def hybrid_metric(theta, nn: MLPParams, ansatz: AnsatzCircuit, initial=None) -> np.ndarray:
    """``Re<d_a Phi|d_b Phi>`` over ``[theta | phi]``."""
    lin = _linearize(theta, nn, ansatz, initial)
    return _metric(lin, _D(lin))


def hybrid_force(theta, nn: MLPParams, ansatz: AnsatzCircuit, H: PauliSum, initial=None) -> np.ndarray:
    """``-Re<d_a Phi|H|Phi>`` over ``[theta | phi]``."""
    return hybrid_system(theta, nn, ansatz, H, initial).force


# --------------------------------------------------------------- evolution


def vqnhite_evolve(
    config: EvolutionConfig,
    ansatz: AnsatzCircuit,
    H: PauliSum,
    seed,
    init_iters: int = 50,
    lr: float = 0.1,
    target_mode: str = "exact",
    psi0: np.ndarray | None = None,
    sample: int = 0,
    snapshots: bool = False,
    widths=None,
) -> FidelityTrace:
    """Initialize at ``beta = dbeta`` by gradient descent, then Euler-evolve ``[theta | phi]``."""
    if target_mode not in TARGET_MODES:
        raise ValueError(f"target_mode must be one of {TARGET_MODES}")
    psi0 = initial_plus_state(ansatz.n_qubits) if psi0 is None else np.asarray(psi0, dtype=complex)
    grid = config.grid()
    sd = spectral(H)
    exact = [exact_ite(sd, psi0, b) for b in grid]
    target = exact[0] if target_mode == "exact" else taylor_target(H, config.dbeta, psi0)

    nn0 = init_params(seed, ansatz.n_qubits, widths)
    init = init_optimize(np.zeros(ansatz.n_params), nn0, ansatz, target, init_iters, lr, psi0)
    params = init.params
    x = params.flatten()
    trace = FidelityTrace(
        metadata={"method": "vqnhite", "config": config.to_dict(), "init_history": init.history}
    )

    def record(step: int, beta: float, p: HybridParams) -> None:
        lin = _linearize(p.theta, p.nn, ansatz, psi0)
        state = lin.C * lin.raw
        trace.add(beta, "vqnhite", sample, fidelity(exact[step], state), _energy(lin, H))
        if snapshots:
            trace.snapshots.append((float(beta), p.flatten()))

    record(0, grid[0], params)
    for step in range(1, len(grid)):
        beta = grid[step]
        try:
            if config.mode == "hadamard":
                hs = hadamard.hybrid_system_from_circuits(
                    ansatz, params.theta, params.nn, H, config.shots, (config.seed, step), psi0
                )
                M, F = hs.metric, hs.force
            else:
                M, F, _ = hybrid_system(params.theta, params.nn, ansatz, H, psi0)
            x = x + solve_update(LinearSystem(M, F), config.dbeta, config.ridge)
            if not np.all(np.isfinite(x)):
                raise DivergenceError("parameters became non-finite")
            params = params.with_flat(x)
            record(step, beta, params)
        except (DivergenceError, DegeneracyError) as exc:
            raise DivergenceError(f"evolution failed at beta={beta:g}: {exc}", beta=float(beta)) from exc
    return trace
