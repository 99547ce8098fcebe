import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vqnhite import kernels
from vqnhite.pauli import PauliString, to_dense

BACKENDS = kernels.available_backends()
Y = np.array([[0, -1j], [1j, 0]])


def block(seed, k, n):
    rng = np.random.default_rng(seed)
    return np.ascontiguousarray(rng.normal(size=(k, 1 << n)) + 1j * rng.normal(size=(k, 1 << n)))


def embed(u, n, q):
    return np.kron(np.kron(np.eye(1 << q), u), np.eye(1 << (n - q - 1)))


def test_compiled_backend_built():
    # the package is expected to ship with its extension; the fallback stays selectable
    assert "python" in BACKENDS
    assert "cython" in BACKENDS


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_use_backend_restores():
    before = kernels.backend_name()
    with kernels.use_backend("python"):
        assert kernels.backend_name() == "python"
    assert kernels.backend_name() == before


@pytest.mark.parametrize("backend", BACKENDS)
class TestAgainstDense:
    @given(st.integers(1, 5), st.data(), st.floats(-7, 7))
    def test_ry(self, backend, n, data, theta):
        q = data.draw(st.integers(0, n - 1))
        s = block(n, 3, n)
        c, si = np.cos(theta / 2), np.sin(theta / 2)
        expect = s @ embed(np.array([[c, -si], [si, c]]), n, q).T
        with kernels.use_backend(backend):
            kernels.impl.apply_ry(s, n, q, theta)
        assert np.allclose(s, expect)

    @given(st.integers(1, 5), st.data())
    def test_1q_and_y(self, backend, n, data):
        q = data.draw(st.integers(0, n - 1))
        rng = np.random.default_rng(q)
        u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
        s = block(n + 10, 2, n)
        s2 = s.copy()
        with kernels.use_backend(backend):
            kernels.impl.apply_1q(s, n, q, u)
            kernels.impl.apply_y(s2, n, q)
        assert np.allclose(s, block(n + 10, 2, n) @ embed(u, n, q).T)
        assert np.allclose(s2, block(n + 10, 2, n) @ embed(Y, n, q).T)

    @given(st.integers(2, 5), st.data())
    def test_cz(self, backend, n, data):
        q1 = data.draw(st.integers(0, n - 2))
        q2 = data.draw(st.integers(q1 + 1, n - 1))
        s = block(1, 2, n)
        idx = np.arange(1 << n)
        bit = lambda q: (idx >> (n - 1 - q)) & 1
        expect = s * np.where(bit(q1) & bit(q2), -1, 1)
        with kernels.use_backend(backend):
            kernels.impl.apply_cz(s, n, q1, q2)
        assert np.allclose(s, expect)

    @given(st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n)))
    def test_pauli(self, backend, label):
        P = PauliString(label)
        s = block(len(label), 3, len(label))
        with kernels.use_backend(backend):
            out = kernels.impl.apply_pauli(s, *P.masks())
        assert np.allclose(out, s @ to_dense(P).T)


def test_backends_agree_bitwise():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    n = 7
    outs = []
    for b in BACKENDS:
        s = block(3, 4, n)
        with kernels.use_backend(b):
            for q in range(n):
                kernels.impl.apply_ry(s, n, q, 0.1 * (q + 1))
            kernels.impl.apply_cz(s, n, 1, 5)
            outs.append(kernels.impl.apply_pauli(s, *PauliString("XYZIXYZ").masks()))
    assert np.allclose(outs[0], outs[1], atol=1e-14)
