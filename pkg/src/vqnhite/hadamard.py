"""Ancilla (Hadamard-test) circuits and Pauli measurement bases.

Every matrix element the engines need can be produced here the way a device
would: an ancilla prepared in ``(|0> + e^{i phi}|1>)/sqrt(2)`` controls two
branches of the system circuit, the ancilla is read out in the X or Y basis,
and optionally the system register is measured (after a basis change ``V``)
so that per-outcome weights can be applied classically.

With ``shots == 0`` the exact outcome distribution is used; otherwise outcomes
are drawn from it with a per-job RNG derived from ``(seed, job_id)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import NotApplicableError
from .neural import MLPParams, nn_jacobian, nn_values
from .pauli import PauliString, PauliSum, pauli_apply
from .statevector import RY, AnsatzCircuit, apply_gate, initial_plus_state, run_circuit

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


class Estimate(NamedTuple):
    """Estimator output. For complex quantities ``std_error`` carries the
    real-part error in its real component and the imaginary-part error in its
    imaginary component."""

    value: float | complex
    std_error: float | complex


# ---------------------------------------------------------------- operations


class GateOp:
    def __init__(self, n: int, gate, theta: np.ndarray):
        self.n, self.gate, self.theta = n, gate, theta

    def __call__(self, block: np.ndarray) -> None:
        apply_gate(block, self.n, self.gate, self.theta)

    def __repr__(self):
        return f"GateOp({self.gate})"


class PauliOp:
    def __init__(self, P: PauliString):
        self.P = P
        self._masks = P.masks()

    def __call__(self, block: np.ndarray) -> None:
        block[:] = kernels.impl.apply_pauli(block, *self._masks)

    def __repr__(self):
        return f"PauliOp({self.P})"


class UnitaryOp:
    def __init__(self, matrix: np.ndarray, name: str = "U"):
        self.matrix, self.name = np.asarray(matrix, dtype=complex), name

    def __call__(self, block: np.ndarray) -> None:
        block[:] = block @ self.matrix.T

    def __repr__(self):
        return f"UnitaryOp({self.name})"


def circuit_ops(
    ansatz: AnsatzCircuit,
    theta,
    inserts: dict[int, tuple[int, PauliString]] | None = None,
    control: int | None = None,
) -> list[tuple[int | None, Callable]]:
    """Gate sequence of ``U(theta)`` as ancilla-controlled operations.

    ``inserts[j] = (branch, u)`` places a controlled ``u`` directly in front of
    rotation ``j``; ``control`` conditions every gate on one ancilla value.
    """
    theta = np.asarray(theta, dtype=float)
    inserts = inserts or {}
    ops: list[tuple[int | None, Callable]] = []
    for g in ansatz.gates:
        if isinstance(g, RY) and g.param in inserts:
            branch, u = inserts[g.param]
            ops.append((branch, PauliOp(u)))
        ops.append((control, GateOp(ansatz.n_qubits, g, theta)))
    return ops


# ------------------------------------------------------------- measurement V


@dataclass(frozen=True)
class MeasurementBasisV:
    """Basis change that maps ``|+, r>`` to ``|0_pivot r>`` and ``|-, r>`` to ``|1_pivot r>``.

    ``pivot`` is the first qubit on which ``P`` acts with X or Y. Rows of
    ``pairs`` are ``(s, s_tilde)`` basis indices with the pivot bit of ``s``
    equal to 0 and ``P|s> = phase|s_tilde>``.
    """

    P: PauliString
    pivot: int
    matrix: np.ndarray
    pairs: np.ndarray
    phases: np.ndarray  # S(s) = conj(phase) entering |+-, r>

    @property
    def pivot_bit(self) -> int:
        return 1 << (self.P.n_qubits - 1 - self.pivot)

    def eigenvector(self, r: int, sign: int) -> np.ndarray:
        """``|+, r>`` (sign=+1) or ``|-, r>`` (sign=-1) for pair row ``r``."""
        return self.matrix.conj().T[:, self.pairs[r, 0] | (0 if sign > 0 else self.pivot_bit)]


def build_V(P: PauliString) -> MeasurementBasisV:
    n = P.n_qubits
    if P.is_diagonal():
        raise NotApplicableError(f"{P} is diagonal; measure it in the computational basis")
    pivot = next(q for q, p in enumerate(P.label) if p in "XY")
    pb = 1 << (n - 1 - pivot)
    dim = 1 << n
    vdag = np.zeros((dim, dim), dtype=complex)
    pairs, phases = [], []
    for s in range(dim):
        if s & pb:
            continue
        bits = format(s, f"0{n}b")
        phase, st = pauli_apply(P, bits)
        s_t = int(st, 2)
        S = np.conj(phase)
        vdag[s, s] = S / math.sqrt(2)
        vdag[s_t, s] = 1 / math.sqrt(2)
        vdag[s, s | pb] = S / math.sqrt(2)
        vdag[s_t, s | pb] = -1 / math.sqrt(2)
        pairs.append((s, s_t))
        phases.append(S)
    return MeasurementBasisV(P, pivot, vdag.conj().T, np.array(pairs), np.array(phases))


# ------------------------------------------------------------- core emulator


@dataclass
class AncillaJob:
    """One ancilla-controlled circuit on ``n_system + 1`` qubits (ancilla first).

    ``weights`` (length ``2**n_system``) turns on a computational-basis
    readout of the system register; each shot then contributes
    ``(-1)**ancilla * weights[s]``. Without weights only the ancilla is read.
    """

    n_system: int
    phase: float = 0.0
    ops: Sequence[tuple[int | None, Callable]] = ()
    basis: str = "X"
    post: MeasurementBasisV | None = None
    shots: int = 0
    weights: np.ndarray | None = None
    initial: np.ndarray | None = None
    seed: int | Sequence[int] = 0


def _job_rng(seed, job_id: int) -> np.random.Generator:
    seed = list(seed) if isinstance(seed, (tuple, list)) else [int(seed)]
    return np.random.default_rng(seed + [int(job_id)])


def prepare_register(job: AncillaJob) -> np.ndarray:
    """Final ``(2, 2**n)`` register amplitudes; row index is the ancilla bit."""
    n = job.n_system
    psi = initial_plus_state(n) if job.initial is None else np.asarray(job.initial, dtype=complex)
    reg = np.empty((2, 1 << n), dtype=complex)
    reg[0] = psi / math.sqrt(2)
    reg[1] = psi * np.exp(1j * job.phase) / math.sqrt(2)
    for ctrl, op in job.ops:
        if ctrl is None:
            op(reg)
        else:
            op(reg[ctrl : ctrl + 1])
    if job.basis == "Y":
        reg[1] *= -1j  # S-dagger on the ancilla
    elif job.basis != "X":
        raise ValueError(f"ancilla basis must be 'X' or 'Y', got {job.basis!r}")
    reg = _H @ reg
    if job.post is not None:
        reg = reg @ job.post.matrix.T
    assert reg.size == 1 << (n + 1)
    return reg


def hadamard_test(job: AncillaJob, job_id: int = 0) -> Estimate:
    """Ancilla expectation ``Re``/``Im`` of ``e^{i phi}<branch0|W|branch1>``."""
    reg = prepare_register(job)
    probs = np.abs(reg) ** 2
    w = np.ones(reg.shape[1]) if job.weights is None else np.asarray(job.weights, dtype=float)
    values = np.stack([w, -w])
    if job.shots == 0:
        return Estimate(float(np.sum(probs * values)), 0.0)
    p = probs.ravel()
    counts = _job_rng(job.seed, job_id).multinomial(job.shots, p / p.sum())
    v = values.ravel()
    mean = float(counts @ v) / job.shots
    second = float(counts @ (v * v)) / job.shots
    var = max(second - mean * mean, 0.0) * job.shots / max(job.shots - 1, 1)
    return Estimate(mean, math.sqrt(var / job.shots))


def sample_weighted(psi: np.ndarray, weights: np.ndarray, shots: int = 0, seed=0, job_id: int = 0) -> Estimate:
    """``sum_s w_s |<s|psi>|^2`` from computational-basis measurements.

    ``weights`` may be ``(2**n,)`` or ``(K, 2**n)``; the same shots are reused for
    every row, as post-processing of one measurement record.
    """
    probs = np.abs(np.asarray(psi)) ** 2
    W = np.asarray(weights, dtype=float)
    if shots == 0:
        return Estimate(W @ probs, np.zeros(W.shape[:-1]) if W.ndim > 1 else 0.0)
    counts = _job_rng(seed, job_id).multinomial(shots, probs / probs.sum())
    mean = W @ counts / shots
    second = (W * W) @ counts / shots
    var = np.maximum(second - mean**2, 0.0) * shots / max(shots - 1, 1)
    return Estimate(mean, np.sqrt(var / shots))


def _combine(parts: list[tuple[complex, Estimate]]) -> Estimate:
    """``sum c_i x_i`` for real-valued estimates with independent errors."""
    value = sum(c * e.value for c, e in parts)
    if all(isinstance(c, (int, float)) or np.isreal(c) for c, _ in parts):
        se = math.sqrt(sum((float(np.real(c)) * e.std_error) ** 2 for c, e in parts))
        return Estimate(float(np.real(value)), se)
    se_re = math.sqrt(sum((np.real(c) * e.std_error) ** 2 for c, e in parts))
    se_im = math.sqrt(sum((np.imag(c) * e.std_error) ** 2 for c, e in parts))
    return Estimate(complex(value), complex(se_re, se_im))


class _Ids:
    """Sequential job ids so every job in one call draws an independent stream."""

    def __init__(self, start: int = 0):
        self.next = start

    def __call__(self) -> int:
        self.next += 1
        return self.next


def _complex_test(job_kwargs: dict, ids: _Ids) -> Estimate:
    re = hadamard_test(AncillaJob(basis="X", **job_kwargs), ids())
    im = hadamard_test(AncillaJob(basis="Y", **job_kwargs), ids())
    return Estimate(complex(re.value, im.value), complex(re.std_error, im.std_error))


def _scale_complex(c: complex, e: Estimate) -> tuple[complex, float, float]:
    v = c * e.value
    se_re = math.hypot(np.real(c) * e.std_error.real, np.imag(c) * e.std_error.imag)
    se_im = math.hypot(np.imag(c) * e.std_error.real, np.real(c) * e.std_error.imag)
    return v, se_re, se_im


def _sum_complex(parts: list[tuple[complex, Estimate]]) -> Estimate:
    total = 0j
    vre = vim = 0.0
    for c, e in parts:
        v, sr, si = _scale_complex(c, e)
        total += v
        vre += sr * sr
        vim += si * si
    return Estimate(complex(total), complex(math.sqrt(vre), math.sqrt(vim)))


# ------------------------------------------------------- Pauli measurements


class PMTable(NamedTuple):
    """``probs[r] = (|<+,r|psi>|^2, |<-,r|psi>|^2)`` for pair ``r = (s, s_tilde)``."""

    pairs: np.ndarray
    probs: np.ndarray
    std_error: np.ndarray


def estimate_pm_probs(psi: np.ndarray, P: PauliString, shots: int = 0, seed=0, job_id: int = 0) -> PMTable:
    """Eigenbasis populations of ``P`` read out after the basis change ``V``."""
    V = build_V(P)
    out = V.matrix @ np.asarray(psi, dtype=complex)
    probs = np.abs(out) ** 2
    probs = probs / probs.sum()
    s = V.pairs[:, 0]
    if shots == 0:
        table = np.stack([probs[s], probs[s | V.pivot_bit]], axis=1)
        return PMTable(V.pairs, table, np.zeros_like(table))
    counts = _job_rng(seed, job_id).multinomial(shots, probs)
    freq = counts / shots
    table = np.stack([freq[s], freq[s | V.pivot_bit]], axis=1)
    return PMTable(V.pairs, table, np.sqrt(table * (1 - table) / shots))


def _pauli_signs(P: PauliString) -> np.ndarray:
    """Eigenvalue of a diagonal string on each basis state."""
    _, phase_mask, _ = P.masks()
    idx = np.arange(1 << P.n_qubits)
    return np.array([1 - 2 * (bin(i & phase_mask).count("1") & 1) for i in idx], dtype=float)


def nondiagonal_expectation(
    ansatz: AnsatzCircuit,
    theta,
    nn: MLPParams,
    P: PauliString,
    shots: int = 0,
    seed=0,
    initial: np.ndarray | None = None,
) -> Estimate:
    """``<phi~|P|phi~>`` from ``sum_r (p+ - p-) f(s) f(s~)`` for non-diagonal ``P``."""
    psi0 = initial_plus_state(ansatz.n_qubits) if initial is None else initial
    phi = run_circuit(ansatz, theta, psi0)
    f = nn_values(nn)
    if shots == 0:
        table = estimate_pm_probs(phi, P)
        w = f[table.pairs[:, 0]] * f[table.pairs[:, 1]]
        return Estimate(float(np.sum((table.probs[:, 0] - table.probs[:, 1]) * w)), 0.0)
    return _pauli_expectations(phi, f, [(1.0, P)], shots, seed)[0]


def _pauli_expectations(phi, f, terms, shots, seed, id_base: int = 0) -> list[Estimate]:
    """``<phi|F P F|phi>`` per term; one measurement setting (and RNG stream) per string."""
    out = []
    for t, (_, P) in enumerate(terms):
        if P.is_diagonal():
            est = sample_weighted(phi, _pauli_signs(P) * f * f, shots, seed, id_base + t)
            out.append(Estimate(float(est.value), float(est.std_error)))
            continue
        V = build_V(P)
        probs = np.abs(V.matrix @ phi) ** 2
        s, st = V.pairs[:, 0], V.pairs[:, 1]
        w = np.zeros(phi.size)
        w[s] = f[s] * f[st]
        w[s | V.pivot_bit] = -f[s] * f[st]
        if shots == 0:
            out.append(Estimate(float(w @ probs), 0.0))
        else:
            est = sample_weighted(V.matrix @ phi, w, shots, seed, id_base + t)
            out.append(Estimate(float(est.value), float(est.std_error)))
    return out


def measured_energy(
    ansatz: AnsatzCircuit, theta, nn: MLPParams, H: PauliSum, shots: int = 0, seed=0, initial=None
) -> Estimate:
    """Energy of the network-modified state from Pauli-basis readout and post-processing."""
    psi0 = initial_plus_state(ansatz.n_qubits) if initial is None else initial
    phi = run_circuit(ansatz, theta, psi0)
    f = nn_values(nn)
    terms = H.real_terms()
    num = _pauli_expectations(phi, f, terms, shots, seed, id_base=1)
    den = sample_weighted(phi, f * f, shots, seed, job_id=0)
    value = sum(h * e.value for (h, _), e in zip(terms, num)) / den.value
    # first-order error propagation of the ratio
    se_num = math.sqrt(sum((h * e.std_error) ** 2 for (h, _), e in zip(terms, num)))
    se = math.hypot(se_num / den.value, value * den.std_error / den.value)
    return Estimate(float(value), float(se))


# ------------------------------------------------------- VITE matrix elements


def fig1a(ansatz, theta, j, p, k, q, shots=0, seed=0, initial=None, job_id=0) -> Estimate:
    """``Re(a*_{j,p} a_{k,q} <U_{j,p}|U_{k,q}>)``: phase on the ancilla, ``r`` classically."""
    tj = ansatz.decomposition(j)[p]
    tk = ansatz.decomposition(k)[q]
    c = np.conj(tj.a) * tk.a
    ops = _with_inserts(ansatz, theta, [(j, 0, tj.generator), (k, 1, tk.generator)])
    job = AncillaJob(ansatz.n_qubits, phase=float(np.angle(c)), ops=ops, shots=shots, initial=initial, seed=seed)
    est = hadamard_test(job, job_id)
    return Estimate(abs(c) * est.value, abs(c) * est.std_error)


def _with_inserts(ansatz, theta, inserts: list[tuple[int, int, PauliString]]):
    """Circuit ops with any number of controlled generator insertions ``(param, branch, u)``."""
    theta = np.asarray(theta, dtype=float)
    by_param: dict[int, list[tuple[int, PauliString]]] = {}
    for j, branch, u in inserts:
        by_param.setdefault(j, []).append((branch, u))
    ops = []
    for g in ansatz.gates:
        if isinstance(g, RY):
            for branch, u in by_param.get(g.param, []):
                ops.append((branch, PauliOp(u)))
        ops.append((None, GateOp(ansatz.n_qubits, g, theta)))
    return ops


def fig1b(ansatz, theta, j, k, P: PauliString, shots=0, seed=0, initial=None, job_id=0) -> Estimate:
    """``Re(a_{j,k} <phi|P|U_{j,k}>)`` via ``Re(e^{-i arg a} <U_{j,k}|P U>)``."""
    t = ansatz.decomposition(j)[k]
    ops = _with_inserts(ansatz, theta, [(j, 0, t.generator)]) + [(1, PauliOp(P))]
    job = AncillaJob(ansatz.n_qubits, phase=-t.phase, ops=ops, shots=shots, initial=initial, seed=seed)
    est = hadamard_test(job, job_id)
    return Estimate(t.r * est.value, t.r * est.std_error)


def vite_M_circuits(ansatz, theta, shots=0, seed=0, initial=None) -> np.ndarray:
    n_p = ansatz.n_params
    M = np.zeros((n_p, n_p))
    ids = _Ids()
    for j in range(n_p):
        for k in range(j, n_p):
            total = 0.0
            for p in range(len(ansatz.decomposition(j))):
                for q in range(len(ansatz.decomposition(k))):
                    total += fig1a(ansatz, theta, j, p, k, q, shots, seed, initial, ids()).value
            M[j, k] = M[k, j] = total
    return M


def vite_C_circuits(ansatz, theta, H: PauliSum, shots=0, seed=0, initial=None) -> np.ndarray:
    C = np.zeros(ansatz.n_params)
    ids = _Ids()
    for j in range(ansatz.n_params):
        for h, P in H.real_terms():
            for k in range(len(ansatz.decomposition(j))):
                C[j] -= h * fig1b(ansatz, theta, j, k, P, shots, seed, initial, ids()).value
    return C


# ------------------------------------------ weighted hybrid matrix elements


def fig5a1(ansatz, theta, j, weights, shots=0, seed=0, initial=None, id_base=0) -> Estimate:
    """``Re sum_s w_s <phi|s><s|d_j phi>`` (weights ``f^2`` give ``D_theta_j``)."""
    parts = []
    ids = _Ids(id_base)
    for l, t in enumerate(ansatz.decomposition(j)):
        ops = _with_inserts(ansatz, theta, [(j, 1, t.generator)])
        job = AncillaJob(
            ansatz.n_qubits, phase=t.phase, ops=ops, shots=shots, weights=weights, initial=initial, seed=seed
        )
        parts.append((t.r, hadamard_test(job, ids())))
    return _combine(parts)


def fig5a2(ansatz, theta, j, P: PauliString, nn: MLPParams, shots=0, seed=0, initial=None, id_base=0) -> Estimate:
    """``Re <phi|F P F|d_j phi>`` with the system read out in the eigenbasis of ``P``."""
    f = nn_values(nn)
    if P.is_diagonal():
        return fig5a1(ansatz, theta, j, _pauli_signs(P) * f * f, shots, seed, initial, id_base)
    V = build_V(P)
    s, st = V.pairs[:, 0], V.pairs[:, 1]
    w = np.zeros(1 << ansatz.n_qubits)
    w[s] = f[s] * f[st]
    w[s | V.pivot_bit] = -f[s] * f[st]
    parts = []
    ids = _Ids(id_base)
    for t in ansatz.decomposition(j):
        ops = _with_inserts(ansatz, theta, [(j, 1, t.generator)])
        job = AncillaJob(
            ansatz.n_qubits, phase=t.phase, ops=ops, post=V, shots=shots, weights=w, initial=initial, seed=seed
        )
        parts.append((t.r, hadamard_test(job, ids())))
    return _combine(parts)


def fig5b(ansatz, theta, j, k, weights, shots=0, seed=0, initial=None, id_base=0) -> Estimate:
    """``Re sum_s w_s <d_j phi|s><s|d_k phi>`` (weights ``f^2`` give the theta-theta term)."""
    parts = []
    ids = _Ids(id_base)
    for t1 in ansatz.decomposition(j):
        for t2 in ansatz.decomposition(k):
            c = np.conj(t1.a) * t2.a
            ops = _with_inserts(ansatz, theta, [(j, 0, t1.generator), (k, 1, t2.generator)])
            job = AncillaJob(
                ansatz.n_qubits,
                phase=float(np.angle(c)),
                ops=ops,
                shots=shots,
                weights=weights,
                initial=initial,
                seed=seed,
            )
            parts.append((abs(c), hadamard_test(job, ids())))
    return _combine(parts)


def fig5c(ansatz, theta, e: PauliSum, weights, shots=0, seed=0, initial=None, id_base=0) -> Estimate:
    """``sum_j e_j sum_s w_s <0|P_j|s><s|phi>``; ``w = f`` gives ``<psi(dbeta)|phi~>``."""
    parts = []
    ids = _Ids(id_base)
    for c, P in e.items():
        ops = [(0, PauliOp(P))] + circuit_ops(ansatz, theta, control=1)
        kw = dict(n_system=ansatz.n_qubits, ops=ops, shots=shots, weights=weights, initial=initial, seed=seed)
        parts.append((c, _complex_test(kw, ids)))
    return _sum_complex(parts)


def fig5d(ansatz, theta, j, e: PauliSum, weights, shots=0, seed=0, initial=None, id_base=0) -> Estimate:
    """``d/dtheta_j`` of :func:`fig5c`: branch 1 carries the derivative circuit."""
    parts = []
    ids = _Ids(id_base)
    for c, P in e.items():
        for t in ansatz.decomposition(j):
            ops = [(0, PauliOp(P))] + circuit_ops(ansatz, theta, inserts={j: (1, t.generator)}, control=1)
            kw = dict(
                n_system=ansatz.n_qubits, phase=t.phase, ops=ops, shots=shots, weights=weights, initial=initial, seed=seed
            )
            parts.append((c * t.r, _complex_test(kw, ids)))
    return _sum_complex(parts)


APPENDIX_KINDS = {
    "fig5a1": fig5a1,
    "fig5a2": fig5a2,
    "fig5b": fig5b,
    "fig5c": fig5c,
    "fig5d": fig5d,
}


def appendix_element(kind: str, **inputs) -> Estimate:
    """Dispatch to the circuit estimator for one hybrid matrix-element kind."""
    try:
        fn = APPENDIX_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown element kind {kind!r}; choose from {sorted(APPENDIX_KINDS)}") from None
    return fn(**inputs)


# ------------------------------------------------------- full hybrid system


@dataclass
class CircuitHybridSystem:
    metric: np.ndarray
    force: np.ndarray
    energy: float
    norm: float


def hybrid_system_from_circuits(
    ansatz: AnsatzCircuit,
    theta,
    nn: MLPParams,
    H: PauliSum,
    shots: int = 0,
    seed=0,
    initial: np.ndarray | None = None,
) -> CircuitHybridSystem:
    """Hybrid metric and force assembled only from measurable quantities.

    Network-only terms come from computational-basis readout of ``U|0>``,
    circuit derivatives from Hadamard tests, Hamiltonian terms from
    eigenbasis readout through ``V``.
    """
    psi0 = initial_plus_state(ansatz.n_qubits) if initial is None else np.asarray(initial, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    phi = run_circuit(ansatz, theta, psi0)
    f, df = nn_jacobian(nn)
    n_t, n_f = ansatz.n_params, df.shape[0]
    terms = H.real_terms()
    job = _Ids()
    kw = dict(shots=shots, seed=seed, initial=psi0)

    def base() -> int:
        # each estimator call uses fewer than 16 consecutive job ids
        return 16 * job()

    # one computational-basis record serves every network-only weight
    rows = np.vstack([f * f, f * df, (df[:, None, :] * df[None, :, :]).reshape(n_f * n_f, -1)])
    net = sample_weighted(phi, rows, shots, seed, job_id=0).value
    norm = float(net[0])
    D_phi = net[1 : 1 + n_f]
    G_phiphi = net[1 + n_f :].reshape(n_f, n_f)

    D_theta = np.array([fig5a1(ansatz, theta, j, f * f, id_base=base(), **kw).value for j in range(n_t)])
    X = np.zeros((n_t, n_f))
    for j in range(n_t):
        for k in range(n_f):
            X[j, k] = fig5a1(ansatz, theta, j, f * df[k], id_base=base(), **kw).value
    Y = np.zeros((n_t, n_t))
    for j in range(n_t):
        for k in range(j, n_t):
            Y[j, k] = Y[k, j] = fig5b(ansatz, theta, j, k, f * f, id_base=base(), **kw).value

    # Hamiltonian terms: <phi~|H|phi~>, Re<phi|dF H F|phi>, Re<d_j phi|F H F|phi>
    num = 0.0
    F_phi = np.zeros(n_f)
    for t, (h, P) in enumerate(terms):
        if P.is_diagonal():
            sig = _pauli_signs(P)
            est = sample_weighted(phi, np.vstack([sig * f * f, sig * f * df]), shots, seed, job_id=base())
            num += h * est.value[0]
            F_phi += h * est.value[1:]
        else:
            V = build_V(P)
            s, st = V.pairs[:, 0], V.pairs[:, 1]
            w = np.zeros((1 + n_f, phi.size))
            w[0, s] = f[s] * f[st]
            # symmetrized partner: both orderings of the swapped pair contribute
            w[1:, s] = 0.5 * (df[:, s] * f[st] + df[:, st] * f[s])
            w[:, s | V.pivot_bit] = -w[:, s]
            est = sample_weighted(V.matrix @ phi, w, shots, seed, job_id=base())
            num += h * est.value[0]
            F_phi += h * est.value[1:]
    F_theta = np.zeros(n_t)
    for j in range(n_t):
        for h, P in terms:
            F_theta[j] += h * fig5a2(ansatz, theta, j, P, nn, id_base=base(), **kw).value

    C2 = 1.0 / norm
    C4 = C2 * C2
    energy = num * C2
    M = np.zeros((n_t + n_f, n_t + n_f))
    M[:n_t, :n_t] = C2 * Y - C4 * (np.outer(D_theta, D_theta) + np.outer(D_theta, D_theta)) + C4 * np.outer(D_theta, D_theta)
    M[:n_t, n_t:] = C2 * X - C4 * (np.outer(D_theta, D_phi) + np.outer(D_theta, D_phi)) + C4 * np.outer(D_theta, D_phi)
    M[n_t:, :n_t] = M[:n_t, n_t:].T
    M[n_t:, n_t:] = C2 * G_phiphi - C4 * (np.outer(D_phi, D_phi) + np.outer(D_phi, D_phi)) + C4 * np.outer(D_phi, D_phi)
    force = np.concatenate([-(-C2 * D_theta * energy + C2 * F_theta), -(-C2 * D_phi * energy + C2 * F_phi)])
    return CircuitHybridSystem(M, force, float(energy), norm)
