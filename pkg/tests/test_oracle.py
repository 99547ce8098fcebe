import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vqnhite.errors import ContractError
from vqnhite.oracle import exact_ite, fidelity, finite_diff, ite_trajectory, spectral
from vqnhite.pauli import PauliSum, build_heisenberg, sample_fields, to_dense
from vqnhite.statevector import initial_plus_state

from conftest import random_state


def test_spectral_reconstruction():
    H = build_heisenberg(4, -1.0, sample_fields(3, 4))
    sd = spectral(H)
    assert np.all(np.diff(sd.eigenvalues) >= 0)
    assert np.linalg.norm(sd.reconstruct() - to_dense(H)) <= 1e-10


def test_spectral_needs_hermitian():
    with pytest.raises(ValueError):
        spectral(PauliSum.from_terms(1, [(1j, "Z")]))


class TestExactITE:
    def test_beta_zero(self, rng):
        H = build_heisenberg(3, 1.0, [0.1, 0.2, 0.3])
        psi = random_state(rng, 3)
        assert np.allclose(exact_ite(H, psi, 0.0), psi)

    @pytest.mark.parametrize("beta", [0.3, 1.0, 2.5])
    def test_two_level_closed_form(self, beta):
        out = exact_ite(PauliSum.from_terms(1, [(1.0, "Z")]), initial_plus_state(1), beta)
        expect = np.array([np.exp(-beta), np.exp(beta)])
        assert np.allclose(out, expect / np.linalg.norm(expect))

    def test_large_beta_ground_state(self, rng):
        H = build_heisenberg(4, 1.0, sample_fields(1, 4))
        sd = spectral(H)
        out = exact_ite(sd, random_state(rng, 4), 50.0)
        assert fidelity(out, sd.ground_state) >= 1 - 1e-8

    def test_no_overflow(self):
        H = build_heisenberg(3, 1.0, [0.5, 0.5, 0.5])
        out = exact_ite(100.0 * H, initial_plus_state(3), 50.0)
        assert np.isfinite(out).all()

    @given(st.integers(0, 100))
    def test_semigroup(self, seed):
        H = build_heisenberg(3, -1.0, sample_fields(seed, 3))
        psi = initial_plus_state(3)
        assert np.allclose(exact_ite(H, exact_ite(H, psi, 0.4), 0.7), exact_ite(H, psi, 1.1))

    def test_trajectory_rows(self):
        H = build_heisenberg(2, 1.0, [0.3, 0.1])
        traj = ite_trajectory(H, initial_plus_state(2), [0.1, 0.2])
        assert np.allclose(traj[1], exact_ite(H, initial_plus_state(2), 0.2))

    def test_spectral_bound(self):
        # excited weight decays at least as fast as the gap allows
        psi = initial_plus_state(6)
        for fs in range(8):
            sd = spectral(build_heisenberg(6, -1.0, sample_fields(fs, 6)))
            ov = abs(np.vdot(sd.ground_state, psi)) ** 2
            if ov < 1e-12:
                continue
            gap = sd.eigenvalues[1] - sd.eigenvalues[0]
            F = fidelity(sd.ground_state, exact_ite(sd, psi, 6.0))
            assert 1 - F <= (1 - ov) / ov * np.exp(-2 * gap * 6.0) + 1e-12


class TestFidelity:
    def test_self_and_phase(self, rng):
        a = random_state(rng, 3)
        assert fidelity(a, a) == pytest.approx(1.0)
        assert fidelity(a, np.exp(0.7j) * a) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert fidelity(np.array([1, 0]), np.array([0, 1])) == 0.0

    def test_rejects_unnormalized(self):
        with pytest.raises(ContractError):
            fidelity(np.array([1.0, 1.0]), np.array([1.0, 0.0]))


class TestFiniteDiff:
    def test_linear_exact(self):
        A = np.array([[1.0, 2.0], [3.0, -1.0]])
        assert np.allclose(finite_diff(lambda x: A @ x, np.zeros(2), 0.3), A.T)

    def test_sin(self):
        assert abs(finite_diff(np.sin, np.zeros(1), 1e-5)[0] - 1) <= 1e-10

    def test_quadratic_error_scaling(self):
        f = lambda x: np.exp(np.sin(x[0]))
        exact = np.cos(0.4) * np.exp(np.sin(0.4))
        errs = [abs(finite_diff(f, [0.4], h)[0] - exact) for h in (1e-2, 1e-3)]
        assert errs[0] / errs[1] == pytest.approx(100, rel=0.05)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            finite_diff(np.sin, [0.0], 0.0)
