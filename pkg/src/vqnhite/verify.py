"""Self-checks against independent oracles: finite differences, dense linear algebra, statistics.

Each suite returns :class:`Check` rows; ``run_suites`` drives them for the CLI.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from . import hadamard
from .hybrid import HybridParams, build_hybrid_state, compute_D, cost_F, cost_gradients, hybrid_system
from .neural import init_params, nn_forward, nn_gradient, nn_values
from .oracle import exact_ite, fidelity, finite_diff, spectral
from .pauli import PauliString, build_heisenberg, sample_fields, taylor_ite_pauli, to_dense
from .statevector import AnsatzCircuit, apply_pauli, apply_pauli_sum, initial_plus_state, run_circuit, tangent_vectors
from .vite import EvolutionConfig, compute_C, compute_M, vite_continuum, vite_evolve


class Check(NamedTuple):
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: {self.value:.3g} vs tol {self.tolerance:.3g}{extra}"


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-8))


def random_instance(rng: np.random.Generator, n: int, layout: str = "nn", depth: int = 2, nn_scale: float = 0.3):
    """Hamiltonian, ansatz and generic (non-identity) parameters for oracle comparisons."""
    H = build_heisenberg(n, rng.uniform(-1.5, 1.5), list(rng.uniform(-1, 1, n)))
    ansatz = AnsatzCircuit.build(n, layout, depth)
    theta = rng.uniform(-math.pi, math.pi, ansatz.n_params)
    nn = init_params(int(rng.integers(2**31)), n)
    nn = nn.with_flat(nn.flatten() + nn_scale * rng.normal(size=nn.size))
    return H, ansatz, theta, nn


# ------------------------------------------------------------------ gradients


def gradient_errors(n_instances: int = 50, seed: int = 0, h: float = 1e-5) -> dict[str, float]:
    """Worst relative error of nn_gradient, cost_gradients and compute_D against central differences."""
    rng = np.random.default_rng(seed)
    worst = {"nn_gradient": 0.0, "cost_gradients": 0.0, "compute_D": 0.0}
    for _ in range(n_instances):
        n = int(rng.integers(1, 5))
        H, ansatz, theta, nn = random_instance(rng, n, layout=str(rng.choice(["nn", "all"])))
        s = tuple(int(b) for b in rng.integers(0, 2, n))
        g = nn_gradient(nn, s)
        g_fd = finite_diff(lambda v: nn_forward(nn.with_flat(v), s), nn.flatten(), h)
        worst["nn_gradient"] = max(worst["nn_gradient"], _rel(g, g_fd))

        p = HybridParams(theta, nn)
        x = p.flatten()
        target = exact_ite(H, initial_plus_state(n), float(rng.uniform(0.05, 1.0)))
        g = cost_gradients(theta, nn, ansatz, target)
        g_fd = finite_diff(lambda v: cost_F(p.with_flat(v).theta, p.with_flat(v).nn, ansatz, target), x, h)
        worst["cost_gradients"] = max(worst["cost_gradients"], _rel(g, g_fd))

        def half_norm(v):
            q = p.with_flat(v)
            raw = build_hybrid_state(q.theta, q.nn, ansatz).raw
            return 0.5 * float(np.vdot(raw, raw).real)

        D = compute_D(theta, nn, ansatz).full
        worst["compute_D"] = max(worst["compute_D"], _rel(D, finite_diff(half_norm, x, h)))
    return worst


def suite_gradients(n_instances: int = 50, seed: int = 0, tol: float = 1e-5) -> list[Check]:
    return [Check(k, v, tol, v <= tol, f"{n_instances} instances") for k, v in gradient_errors(n_instances, seed).items()]


# -------------------------------------------------------------------- oracles


def oracle_errors(n_instances: int = 6, seed: int = 1, h: float = 1e-6) -> dict[str, float]:
    """Hybrid metric/force against the finite-difference Gram matrix (absolute); VITE M/C (relative)."""
    rng = np.random.default_rng(seed)
    worst = {"hybrid_metric": 0.0, "hybrid_force": 0.0, "vite_M": 0.0, "vite_C": 0.0}
    for i in range(n_instances):
        n = 1 + i % 3
        H, ansatz, theta, nn = random_instance(rng, n, layout="nn" if i % 2 else "all")
        p = HybridParams(theta, nn)
        J = finite_diff(lambda v: build_hybrid_state(p.with_flat(v).theta, p.with_flat(v).nn, ansatz).normalized, p.flatten(), h)
        Phi = build_hybrid_state(theta, nn, ansatz).normalized
        sys = hybrid_system(theta, nn, ansatz, H)
        worst["hybrid_metric"] = max(worst["hybrid_metric"], float(np.max(np.abs(sys.metric - (J.conj() @ J.T).real))))
        F_fd = -(J.conj() @ apply_pauli_sum(H, Phi)).real
        worst["hybrid_force"] = max(worst["hybrid_force"], float(np.max(np.abs(sys.force - F_fd))))

        psi0 = initial_plus_state(n)
        Jc = finite_diff(lambda t: run_circuit(ansatz, t, psi0), theta, h)
        phi = run_circuit(ansatz, theta, psi0)
        worst["vite_M"] = max(worst["vite_M"], _rel(compute_M(ansatz, theta), (Jc.conj() @ Jc.T).real))
        worst["vite_C"] = max(worst["vite_C"], _rel(compute_C(ansatz, theta, H), -(Jc.conj() @ apply_pauli_sum(H, phi)).real))
    return worst


def suite_oracles(seed: int = 1) -> list[Check]:
    err = oracle_errors(seed=seed)
    tols = {"hybrid_metric": 1e-4, "hybrid_force": 1e-4, "vite_M": 1e-6, "vite_C": 1e-6}
    return [Check(k, v, tols[k], v <= tols[k]) for k, v in err.items()]


# -------------------------------------------------------------------- hadamard


def element_cases(rng: np.random.Generator, n: int = 2):
    """``(kind, inputs, exact_value)`` for every hybrid element kind on one random instance."""
    H, ansatz, theta, nn = random_instance(rng, n)
    psi0 = initial_plus_state(n)
    phi, dphi = tangent_vectors(ansatz, theta, psi0)
    f = nn_values(nn)
    w = f * f
    j, k = (int(v) for v in rng.integers(0, ansatz.n_params, 2))
    labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(2)]
    P = PauliString(next((lab for lab in labels if any(c in "XY" for c in lab)), "X" + "I" * (n - 1)))
    e = taylor_ite_pauli(H, float(rng.uniform(0.05, 0.3)))
    base = dict(ansatz=ansatz, theta=theta)

    def ev(vec):
        return sum(c * np.vdot(apply_pauli(Q, psi0), w * vec) for c, Q in e.items())

    FPF = apply_pauli(P, f * phi)
    return [
        ("fig5a1", {**base, "j": j, "weights": w}, float(np.real(np.vdot(phi, w * dphi[j])))),
        ("fig5a2", {**base, "j": j, "P": P, "nn": nn}, float(np.real(np.vdot(f * FPF, dphi[j])))),
        ("fig5b", {**base, "j": j, "k": k, "weights": w}, float(np.real(np.vdot(dphi[j], w * dphi[k])))),
        ("fig5c", {**base, "e": e, "weights": w}, complex(ev(phi))),
        ("fig5d", {**base, "j": j, "e": e, "weights": w}, complex(ev(dphi[j]))),
    ]


def hadamard_exact_errors(n_instances: int = 5, seed: int = 2) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    for i in range(n_instances):
        for kind, inputs, exact in element_cases(rng, n=1 + i % 3):
            est = hadamard.appendix_element(kind, **inputs)
            worst[kind] = max(worst.get(kind, 0.0), abs(est.value - exact))
    return worst


def _within(est: hadamard.Estimate, exact, k: float) -> bool:
    err = complex(est.value) - complex(exact)
    se = complex(est.std_error)
    return abs(err.real) <= k * se.real + 1e-12 and abs(err.imag) <= k * se.imag + 1e-12


def hadamard_shot_coverage(trials: int = 200, shots: int = 100_000, k: float = 5.0, seed: int = 3) -> float:
    """Fraction of seeded shot-mode estimates within ``k`` standard errors of exact mode."""
    rng = np.random.default_rng(seed)
    hits = 0
    cases = []
    for t in range(trials):
        if not cases:
            cases = element_cases(rng, n=2)
        kind, inputs, _ = cases.pop()
        exact = hadamard.appendix_element(kind, **inputs).value
        est = hadamard.appendix_element(kind, **inputs, shots=shots, seed=[seed, t])
        hits += _within(est, exact, k)
    return hits / trials


def suite_hadamard(trials: int = 200, shots: int = 100_000) -> list[Check]:
    out = [Check(f"{kind} exact", v, 1e-10, v <= 1e-10) for kind, v in sorted(hadamard_exact_errors().items())]
    cov = hadamard_shot_coverage(trials, shots)
    out.append(Check("shot coverage (5 SE)", cov, 0.99, cov >= 0.99, f"{trials} trials x {shots} shots"))
    return out


# ----------------------------------------------------------------- convergence


def taylor_error(H, dbeta: float) -> float:
    """Spectral-norm error of the second-order Taylor-Pauli propagator."""
    exact = scipy.linalg.expm(-to_dense(H) * dbeta)
    return float(np.linalg.norm(to_dense(taylor_ite_pauli(H, dbeta, 2)) - exact, 2))


def taylor_ratio(H, dbeta: float = 0.1) -> float:
    return taylor_error(H, dbeta) / taylor_error(H, dbeta / 2)


def euler_deficits(
    H, ansatz: AnsatzCircuit, dbetas=(0.1, 0.05, 0.025), beta_max: float = 6.0, ridge: float = 1e-4
) -> tuple[float, np.ndarray]:
    """Final-beta fidelity of the continuum flow and the Euler deficit ``F_ref - F(dbeta)`` per step size."""
    psi0 = initial_plus_state(ansatz.n_qubits)
    cfg = EvolutionConfig(dbeta=dbetas[-1], beta_max=beta_max, ridge=ridge)
    exact = exact_ite(H, psi0, float(cfg.grid()[-1]))
    F_ref = fidelity(exact, run_circuit(ansatz, vite_continuum(cfg, ansatz, H, psi0), psi0))
    F = [vite_evolve(EvolutionConfig(dbeta=d, beta_max=beta_max, ridge=ridge), ansatz, H, psi0).records[-1].fidelity for d in dbetas]
    return F_ref, F_ref - np.array(F)


EULER_INSTANCE = dict(n=2, J=-1.0, field_seed=0, layout="nn", depth=1)


def euler_instance():
    c = EULER_INSTANCE
    H = build_heisenberg(c["n"], c["J"], sample_fields(c["field_seed"], c["n"]))
    return H, AnsatzCircuit.build(c["n"], c["layout"], c["depth"])


def suite_convergence() -> list[Check]:
    H2 = build_heisenberg(2, -1.0, sample_fields(0, 2))
    tr = taylor_ratio(H2)
    H, ansatz = euler_instance()
    F_ref, d = euler_deficits(H, ansatz, (0.1, 0.05))
    er = float(d[0] / d[1])
    return [
        Check("taylor halving ratio", tr, 8.0, abs(tr - 8) <= 0.2 * 8, f"exponent {math.log2(tr):.3f}, expect 3"),
        Check("euler halving ratio", er, 2.0, abs(er - 2) <= 0.3 * 2, f"exponent {math.log2(er):.3f}, expect 1"),
    ]


# --------------------------------------------------------------------- physics


def wick_residual(H, psi0: np.ndarray, beta: float) -> float:
    """Distance between :func:`exact_ite` and real-time ``expm(-iHt)`` continued to ``t = -i beta``."""
    U = scipy.linalg.expm(-1j * to_dense(H) * (-1j * beta))
    w = U @ psi0
    return float(np.linalg.norm(w / np.linalg.norm(w) - exact_ite(H, psi0, beta)))


class GroundStateRow(NamedTuple):
    field_seed: int
    overlap: float
    gap: float
    fidelity: float
    wick: float


def ground_state_rows(n: int = 6, J: float = -1.0, instances: int = 20, beta: float = 6.0) -> list[GroundStateRow]:
    psi0 = initial_plus_state(n)
    rows = []
    for fs in range(instances):
        H = build_heisenberg(n, J, sample_fields(fs, n))
        sd = spectral(H)
        g = sd.ground_state
        rows.append(
            GroundStateRow(
                fs,
                abs(np.vdot(g, psi0)) ** 2,
                float(sd.eigenvalues[1] - sd.eigenvalues[0]),
                fidelity(g, exact_ite(sd, psi0, beta)),
                wick_residual(H, psi0, beta),
            )
        )
    return rows


def suite_physics(instances: int = 20) -> list[Check]:
    rows = ground_state_rows(instances=instances)
    eligible = [r for r in rows if r.overlap > 0.05]
    bad = [r for r in eligible if r.fidelity < 0.99]
    worst = min((r.fidelity for r in eligible), default=1.0)
    wick = max(r.wick for r in rows)
    return [
        Check(
            "ground-state fidelity at beta=6",
            worst,
            0.99,
            not bad,
            f"{len(eligible) - len(bad)}/{len(eligible)} eligible instances pass",
        ),
        Check("wick residual", wick, 1e-6, wick <= 1e-6),
    ]


SUITES: dict[str, Callable[[], list[Check]]] = {
    "gradients": suite_gradients,
    "oracles": suite_oracles,
    "hadamard": suite_hadamard,
    "convergence": suite_convergence,
    "physics": suite_physics,
}


def run_suites(names=None, echo: Callable[[str], None] = print) -> bool:
    ok = True
    for name in names or SUITES:
        echo(f"== {name}")
        for check in SUITES[name]():
            echo("  " + check.line())
            ok &= check.passed
    return ok
