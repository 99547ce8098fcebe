import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vqnhite.oracle import finite_diff
from vqnhite.pauli import PauliString, to_dense
from vqnhite.statevector import (
    CZ,
    RY,
    AnsatzCircuit,
    apply_pauli,
    basis_state,
    dense_unitary,
    derivative_states,
    initial_plus_state,
    inner,
    n_qubits_of,
    parameter_shift_tangents,
    run_circuit,
    tangent_vectors,
)

from conftest import random_state

ansatz_args = st.tuples(st.integers(1, 4), st.sampled_from(["nn", "all"]), st.integers(0, 3))


def thetas(ansatz, seed):
    return np.random.default_rng(seed).uniform(-math.pi, math.pi, ansatz.n_params)


class TestStates:
    def test_plus_1(self):
        assert np.allclose(initial_plus_state(1), [2**-0.5, 2**-0.5])

    def test_plus_2(self):
        assert np.allclose(initial_plus_state(2), 0.5)

    def test_plus_6_norm(self):
        assert abs(np.linalg.norm(initial_plus_state(6)) - 1) < 1e-14

    def test_basis_state(self):
        assert basis_state("10")[2] == 1

    def test_n_qubits_of(self):
        assert n_qubits_of(np.zeros(8)) == 3
        with pytest.raises(ValueError):
            n_qubits_of(np.zeros(6))


class TestAnsatz:
    def test_layout_pairs(self):
        assert AnsatzCircuit.build(4, "nn").entangling_pairs() == [(0, 1), (1, 2), (2, 3)]
        assert len(AnsatzCircuit.build(4, "all").entangling_pairs()) == 6

    def test_param_count(self):
        a = AnsatzCircuit.build(5, "nearest-neighbor", 3)
        assert a.n_params == 20
        assert sorted(g.param for g in a.gates if isinstance(g, RY)) == list(range(20))

    def test_bad_layout(self):
        with pytest.raises(ValueError):
            AnsatzCircuit.build(3, "ring")

    def test_decomposition_single_term(self):
        (t,) = AnsatzCircuit.build(2).decomposition(3)
        assert t.a == pytest.approx(-0.5j)
        assert t.generator.label == "IY"

    def test_wrong_theta_length(self):
        a = AnsatzCircuit.build(2)
        with pytest.raises(ValueError):
            run_circuit(a, np.zeros(a.n_params + 1), initial_plus_state(2))


class TestRunCircuit:
    @pytest.mark.parametrize("layout", ["nn", "all"])
    def test_identity_at_zero_even_depth(self, layout):
        a = AnsatzCircuit.build(4, layout, 2)
        psi = initial_plus_state(4)
        assert np.allclose(run_circuit(a, np.zeros(a.n_params), psi), psi)

    def test_zero_angles_odd_depth_is_cz_layer(self):
        a = AnsatzCircuit.build(3, "nn", 1)
        psi = initial_plus_state(3)
        cz = np.diag(np.diag(dense_unitary(a, np.zeros(a.n_params))))
        out = run_circuit(a, np.zeros(a.n_params), psi)
        assert np.allclose(out, cz @ psi) and abs(np.linalg.norm(out) - 1) < 1e-12

    def test_ry_pi(self):
        a = AnsatzCircuit.build(1, "nn", 0)
        out = run_circuit(a, np.array([math.pi]), basis_state("0"))
        assert np.allclose(abs(out), [0, 1])

    @given(ansatz_args, st.integers(0, 1000))
    def test_matches_dense_and_unitary(self, args, seed):
        a = AnsatzCircuit.build(*args)
        th = thetas(a, seed)
        psi = random_state(np.random.default_rng(seed), a.n_qubits)
        out = run_circuit(a, th, psi)
        assert np.allclose(out, dense_unitary(a, th) @ psi)
        assert abs(np.linalg.norm(out) - 1) < 1e-10


class TestDerivatives:
    def test_single_rotation_at_zero(self):
        a = AnsatzCircuit.build(1, "nn", 0)
        ((coef, state),) = derivative_states(a, np.zeros(1), 0, initial_plus_state(1))
        Y = np.array([[0, -1j], [1j, 0]])
        assert coef == pytest.approx(-0.5j)
        assert np.allclose(coef * state, -0.5j * Y @ initial_plus_state(1))

    @given(ansatz_args, st.integers(0, 1000))
    def test_against_finite_difference(self, args, seed):
        a = AnsatzCircuit.build(*args)
        th = thetas(a, seed)
        psi = initial_plus_state(a.n_qubits)
        fd = finite_diff(lambda t: run_circuit(a, t, psi), th, 1e-5)
        for j in range(a.n_params):
            d = sum(c * s for c, s in derivative_states(a, th, j, psi))
            assert np.max(np.abs(d - fd[j])) <= 1e-8
        _, dphi = tangent_vectors(a, th, psi)
        assert np.allclose(dphi, fd, atol=1e-8)

    @given(ansatz_args, st.integers(0, 1000))
    def test_shift_rule_agrees(self, args, seed):
        a = AnsatzCircuit.build(*args)
        th = thetas(a, seed)
        psi = initial_plus_state(a.n_qubits)
        assert np.allclose(parameter_shift_tangents(a, th, psi), tangent_vectors(a, th, psi)[1], atol=1e-12)


class TestPauliAndInner:
    def test_z_on_plus(self):
        assert np.allclose(apply_pauli(PauliString("Z"), initial_plus_state(1)), [2**-0.5, -(2**-0.5)])

    @given(st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n)), st.integers(0, 99))
    def test_involution_and_dense(self, label, seed):
        P = PauliString(label)
        psi = random_state(np.random.default_rng(seed), len(label))
        out = apply_pauli(P, psi)
        assert np.max(np.abs(out - to_dense(P) @ psi)) <= 1e-12
        assert np.allclose(apply_pauli(P, out), psi)

    def test_inner_basics(self, rng):
        a, b = random_state(rng, 3), random_state(rng, 3)
        assert inner(a, a) == pytest.approx(1.0)
        assert inner(basis_state("0"), basis_state("1")) == 0
        assert abs(inner(a, b)) ** 2 == pytest.approx(abs(inner(b, a)) ** 2)
        with pytest.raises(ValueError):
            inner(a, basis_state("0"))
