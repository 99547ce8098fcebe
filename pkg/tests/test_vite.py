import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vqnhite.errors import SingularSystemError
from vqnhite.oracle import finite_diff
from vqnhite.pauli import PauliSum, build_heisenberg, sample_fields
from vqnhite.statevector import AnsatzCircuit, expectation, initial_plus_state, run_circuit
from vqnhite.trace import beta_grid
from vqnhite.vite import (
    EvolutionConfig,
    LinearSystem,
    compute_C,
    compute_M,
    compute_M_direct,
    solve_update,
    vite_continuum,
    vite_evolve,
)


def instance(n, layout="nn", seed=0):
    a = AnsatzCircuit.build(n, layout, 2)
    th = np.random.default_rng(seed).uniform(-math.pi, math.pi, a.n_params)
    H = build_heisenberg(n, -1.0, sample_fields(seed, n))
    return a, th, H


class TestConfig:
    @pytest.mark.parametrize(
        "kw", [dict(dbeta=0), dict(dbeta=0.5, beta_max=0.1), dict(ridge=-1), dict(mode="sampled"), dict(shots=-1)]
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            EvolutionConfig(**kw)

    def test_grid(self):
        g = EvolutionConfig().grid()
        assert len(g) == 60 and g[0] == 0.1 and g[-1] == 6.0
        assert np.allclose(np.diff(g), 0.1)

    def test_grid_rounds_up(self):
        assert beta_grid(0.25, 1.1)[-1] == 1.25


class TestComputeM:
    def test_single_rotation(self):
        a = AnsatzCircuit.build(1, "nn", 0)
        for t in (0.0, 0.7, -2.0):
            assert np.allclose(compute_M(a, np.array([t])), [[0.25]])

    def test_symmetric(self):
        a, th, _ = instance(4)
        M = compute_M(a, th)
        assert np.max(np.abs(M - M.T)) <= 1e-12

    @pytest.mark.parametrize("layout", ["nn", "all"])
    def test_against_finite_difference(self, layout):
        a, th, _ = instance(3, layout, 1)
        psi = initial_plus_state(3)
        J = finite_diff(lambda t: run_circuit(a, t, psi), th, 1e-6)
        assert np.allclose(compute_M(a, th), (J.conj() @ J.T).real, atol=1e-6)

    @given(st.integers(0, 500))
    def test_shift_rule_path_agrees(self, seed):
        a, th, _ = instance(3, "all", seed)
        assert np.allclose(compute_M(a, th), compute_M_direct(a, th), atol=1e-12)


class TestComputeC:
    def test_zero_hamiltonian(self):
        a, th, _ = instance(2)
        assert not compute_C(a, th, PauliSum(2, {})).any()

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_half_energy_gradient(self, seed):
        a, th, H = instance(3, "nn", seed)
        psi = initial_plus_state(3)
        fd = finite_diff(lambda t: expectation(H, run_circuit(a, t, psi)), th, 1e-5)
        assert np.allclose(compute_C(a, th, H), -0.5 * fd, atol=1e-6)

    def test_stationary_point(self):
        # theta_j = 0 on a Z field with |+>: <Z> = -sin(theta) is stationary at pi/2
        a = AnsatzCircuit.build(1, "nn", 0)
        H = PauliSum.from_terms(1, [(1.0, "Z")])
        assert compute_C(a, np.array([math.pi / 2]), H) == pytest.approx([0.0], abs=1e-12)

    def test_qubit_mismatch(self):
        a, th, _ = instance(2)
        with pytest.raises(ValueError):
            compute_C(a, th, build_heisenberg(3, 1.0, [0, 0, 0]))


class TestSolveUpdate:
    def test_identity(self):
        c = np.array([1.0, -2.0])
        assert np.allclose(solve_update(LinearSystem(np.eye(2), c), 0.1, 0.5), c * 0.1 / 1.5)

    def test_zero_force(self):
        assert not solve_update(LinearSystem(np.eye(3), np.zeros(3)), 0.1).any()

    @given(st.integers(0, 1000))
    def test_residual(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.normal(size=(5, 5))
        M = A @ A.T + 0.1 * np.eye(5)
        C = rng.normal(size=5)
        d = solve_update(LinearSystem(M, C), 0.2, 1e-6)
        assert np.linalg.norm((M + 1e-6 * np.eye(5)) @ d / 0.2 - C) <= 1e-10

    def test_singular_without_ridge(self):
        with pytest.raises(SingularSystemError) as err:
            solve_update(LinearSystem(np.diag([1.0, 0.0]), np.ones(2)), 0.1, ridge=0.0)
        assert err.value.smallest_eigenvalue == pytest.approx(0.0)

    def test_singular_with_ridge_is_finite(self):
        assert np.isfinite(solve_update(LinearSystem(np.zeros((2, 2)), np.ones(2)), 0.1, 1e-6)).all()


class TestEvolve:
    def test_zero_hamiltonian(self):
        a = AnsatzCircuit.build(2, "all", 2)
        tr = vite_evolve(EvolutionConfig(beta_max=1.0, ridge=1e-6), a, PauliSum(2, {}), snapshots=True)
        assert np.allclose(tr.fidelities(), 1.0)
        assert all(not th.any() for _, th in tr.snapshots)

    def test_records_and_energy(self):
        a, _, H = instance(3)
        tr = vite_evolve(EvolutionConfig(beta_max=1.0), a, H)
        assert np.allclose(tr.betas(), beta_grid(0.1, 1.0))
        assert np.all((tr.fidelities() >= 0) & (tr.fidelities() <= 1))
        assert tr.energies()[-1] < tr.energies()[0]

    def test_deterministic(self):
        a, _, H = instance(2)
        cfg = EvolutionConfig(beta_max=2.0)
        assert vite_evolve(cfg, a, H).records == vite_evolve(cfg, a, H).records

    def test_hadamard_mode_exact_matches(self):
        a, _, H = instance(2)
        t1 = vite_evolve(EvolutionConfig(beta_max=0.5), a, H)
        t2 = vite_evolve(EvolutionConfig(beta_max=0.5, mode="hadamard"), a, H)
        assert np.allclose(t1.fidelities(), t2.fidelities(), atol=1e-10)

    def test_euler_approaches_continuum(self):
        a = AnsatzCircuit.build(2, "nn", 1)
        H = build_heisenberg(2, -1.0, sample_fields(0, 2))
        psi = initial_plus_state(2)
        ref = run_circuit(a, vite_continuum(EvolutionConfig(beta_max=2.0), a, H), psi)
        errs = []
        for db in (0.1, 0.05):
            th = vite_evolve(EvolutionConfig(dbeta=db, beta_max=2.0), a, H, snapshots=True).snapshots[-1][1]
            errs.append(np.linalg.norm(run_circuit(a, th, psi) - ref))
        assert errs[0] / errs[1] == pytest.approx(2, rel=0.3)
