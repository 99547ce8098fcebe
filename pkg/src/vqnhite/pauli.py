"""Pauli strings, weighted Pauli sums and Hamiltonian construction.

Qubit 0 is the leftmost letter of a label and the most significant bit of a
computational-basis index, so ``"XIZ"`` acts with X on qubit 0 and Z on qubit 2,
and bitstring ``"011"`` is basis index 3.
"""

from __future__ import annotations

import configparser
import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ResourceError

DENSE_QUBIT_LIMIT = 12
MERGE_TOL = 1e-12

_LETTERS = "IXYZ"

# (a, b) -> (phase, c) with a.b = phase * c for single-qubit Paulis
_MUL_TABLE: dict[tuple[str, str], tuple[complex, str]] = {}
for _a in _LETTERS:
    _MUL_TABLE[("I", _a)] = (1, _a)
    _MUL_TABLE[(_a, "I")] = (1, _a)
    _MUL_TABLE[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _MUL_TABLE[(_a, _b)] = (1j, _c)
    _MUL_TABLE[(_b, _a)] = (-1j, _c)

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, e.g. ``PauliString("XYZ")``."""

    label: str

    def __post_init__(self):
        label = self.label.upper()
        if not label or any(c not in _LETTERS for c in label):
            raise ValueError(f"invalid Pauli label {self.label!r}")
        object.__setattr__(self, "label", label)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls("I" * n)

    @classmethod
    def from_sparse(cls, n: int, factors: Mapping[int, str]) -> PauliString:
        """Build from ``{qubit: letter}``; unspecified qubits are identity."""
        letters = ["I"] * n
        for q, p in factors.items():
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} out of range for n={n}")
            letters[q] = p
        return cls("".join(letters))

    @property
    def n_qubits(self) -> int:
        return len(self.label)

    @property
    def factors(self) -> tuple[str, ...]:
        return tuple(self.label)

    def __str__(self):
        return self.label

    def is_identity(self) -> bool:
        return set(self.label) <= {"I"}

    def is_diagonal(self) -> bool:
        return set(self.label) <= {"I", "Z"}

    def masks(self) -> tuple[int, int, int]:
        """Return ``(x_mask, phase_mask, n_y)`` for the index-space action.

        ``P|i> = 1j**n_y * (-1)**popcount(i & phase_mask) |i ^ x_mask>``.
        """
        n = self.n_qubits
        x_mask = phase_mask = n_y = 0
        for q, p in enumerate(self.label):
            bit = 1 << (n - 1 - q)
            if p in "XY":
                x_mask |= bit
            if p in "YZ":
                phase_mask |= bit
            if p == "Y":
                n_y += 1
        return x_mask, phase_mask, n_y


def _as_bits(s: str | Sequence[int]) -> list[int]:
    if isinstance(s, str):
        if any(c not in "01" for c in s):
            raise ValueError(f"invalid bitstring {s!r}")
        return [int(c) for c in s]
    bits = [int(b) for b in s]
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"invalid bitstring {s!r}")
    return bits


def pauli_apply(P: PauliString, s: str | Sequence[int]) -> tuple[complex, str | tuple[int, ...]]:
    """Act with ``P`` on basis state ``|s>``: returns ``(phase, s_tilde)``.

    The transformed bitstring has the same type as ``s`` (str or tuple).
    """
    bits = _as_bits(s)
    if len(bits) != P.n_qubits:
        raise ValueError(f"bitstring length {len(bits)} != {P.n_qubits} qubits")
    phase: complex = 1
    out = []
    for p, b in zip(P.label, bits):
        if p == "X":
            out.append(1 - b)
        elif p == "Y":
            phase *= 1j if b == 0 else -1j
            out.append(1 - b)
        elif p == "Z":
            phase *= 1 if b == 0 else -1
            out.append(b)
        else:
            out.append(b)
    if isinstance(s, str):
        return phase, "".join(map(str, out))
    return phase, tuple(out)


def pauli_mul(A: PauliString, B: PauliString) -> tuple[complex, PauliString]:
    """Product ``A.B = phase * C`` of two Pauli strings."""
    if A.n_qubits != B.n_qubits:
        raise ValueError(f"qubit count mismatch: {A.n_qubits} vs {B.n_qubits}")
    phase: complex = 1
    letters = []
    for a, b in zip(A.label, B.label):
        ph, c = _MUL_TABLE[(a, b)]
        phase *= ph
        letters.append(c)
    return phase, PauliString("".join(letters))


@dataclass(frozen=True)
class PauliSum:
    """Canonical (merged) weighted sum of Pauli strings.

    Construct through :meth:`from_terms`, which merges duplicate strings and
    drops coefficients below ``MERGE_TOL``.
    """

    n_qubits: int
    terms: Mapping[PauliString, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        for P in self.terms:
            if P.n_qubits != self.n_qubits:
                raise ValueError(f"term {P} does not act on {self.n_qubits} qubits")
        object.__setattr__(self, "terms", MappingProxyType(dict(self.terms)))

    @classmethod
    def from_terms(
        cls, n_qubits: int, terms: Iterable[tuple[complex, PauliString | str]]
    ) -> PauliSum:
        merged: dict[PauliString, complex] = {}
        for coef, P in terms:
            if isinstance(P, str):
                P = PauliString(P)
            merged[P] = merged.get(P, 0) + complex(coef)
        merged = {P: c for P, c in merged.items() if abs(c) >= MERGE_TOL}
        return cls(n_qubits, merged)

    @classmethod
    def identity(cls, n_qubits: int, coef: complex = 1.0) -> PauliSum:
        return cls.from_terms(n_qubits, [(coef, PauliString.identity(n_qubits))])

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.items())

    def items(self) -> list[tuple[complex, PauliString]]:
        """Terms as ``(coefficient, string)`` pairs in a stable order."""
        return [(c, P) for P, c in sorted(self.terms.items(), key=lambda kv: kv[0].label)]

    def coefficient(self, P: PauliString | str) -> complex:
        if isinstance(P, str):
            P = PauliString(P)
        return self.terms.get(P, 0)

    def is_hermitian(self, tol: float = MERGE_TOL) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def real_terms(self) -> list[tuple[float, PauliString]]:
        """Terms with real coefficients; raises if any imaginary part survives."""
        if not self.is_hermitian():
            raise ValueError("operator has complex coefficients")
        return [(c.real, P) for c, P in self.items()]

    def __add__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return PauliSum.from_terms(self.n_qubits, itertools.chain(self.items(), other.items()))

    def __neg__(self) -> PauliSum:
        return self * -1

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            if other.n_qubits != self.n_qubits:
                raise ValueError("qubit count mismatch")
            products = []
            for ca, A in self.items():
                for cb, B in other.items():
                    ph, C = pauli_mul(A, B)
                    products.append((ca * cb * ph, C))
            return PauliSum.from_terms(self.n_qubits, products)
        if isinstance(other, (int, float, complex, np.number)):
            return PauliSum.from_terms(self.n_qubits, [(c * other, P) for c, P in self.items()])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{P}" for c, P in self.items())
        return f"PauliSum(n={self.n_qubits}: {body or '0'})"


def build_heisenberg(n: int, J: float, h: Sequence[float]) -> PauliSum:
    """Open-boundary Heisenberg chain with longitudinal fields.

    ``H = J sum_j (X_j X_{j+1} + Y_j Y_{j+1} + Z_j Z_{j+1}) + sum_j h_j Z_j``.
    """
    h = list(h)
    if n < 1:
        raise ValueError("need at least one qubit")
    if len(h) != n:
        raise ValueError(f"field vector has length {len(h)}, expected {n}")
    terms: list[tuple[complex, PauliString]] = []
    for j in range(n - 1):
        for p in "XYZ":
            terms.append((J, PauliString.from_sparse(n, {j: p, j + 1: p})))
    for j, hj in enumerate(h):
        terms.append((hj, PauliString.from_sparse(n, {j: "Z"})))
    return PauliSum.from_terms(n, terms)


def taylor_ite_pauli(H: PauliSum, dbeta: float, order: int = 2) -> PauliSum:
    """Truncated series ``I - H dbeta (+ (H dbeta)^2 / 2)`` as a merged Pauli sum."""
    if order not in (1, 2):
        raise ValueError(f"unsupported Taylor order {order}; use 1 or 2")
    if dbeta < 0:
        raise ValueError("dbeta must be non-negative")
    one = PauliSum.identity(H.n_qubits)
    step = H * dbeta
    out = one - step
    if order == 2:
        out = out + (step * step) * 0.5
    return out


def to_dense(A: PauliSum | PauliString, limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a Pauli sum or string."""
    if isinstance(A, PauliString):
        A = PauliSum.from_terms(A.n_qubits, [(1.0, A)])
    n = A.n_qubits
    if n > limit:
        raise ResourceError(f"{n} qubits exceeds dense limit {limit}")
    dim = 1 << n
    idx = np.arange(dim)
    out = np.zeros((dim, dim), dtype=complex)
    for coef, P in A.items():
        x_mask, phase_mask, n_y = P.masks()
        parity = np.array([bin(i & phase_mask).count("1") & 1 for i in range(dim)])
        phase = (1j**n_y) * (1 - 2 * parity)
        out[idx ^ x_mask, idx] += coef * phase
    return out


def kron_dense(P: PauliString) -> np.ndarray:
    """Dense matrix of a single string via Kronecker products (independent of masks)."""
    out = np.ones((1, 1), dtype=complex)
    for p in P.label:
        out = np.kron(out, _SINGLE[p])
    return out


def load_hamiltonian_config(path) -> PauliSum:
    """Read a Heisenberg instance from an INI-style ``[hamiltonian]`` section.

    Keys: ``n``, ``J``, and either ``fields`` (comma-separated reals) or
    ``field_seed`` (integer; fields drawn uniformly from [-1, 1]).
    """
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if "hamiltonian" not in parser:
        raise ValueError(f"{path}: missing [hamiltonian] section")
    sec = parser["hamiltonian"]
    if "n" not in sec:
        raise ValueError(f"{path}: [hamiltonian] needs a qubit count n")
    n = sec.getint("n")
    J = sec.getfloat("J", fallback=-1.0)
    if "fields" in sec:
        h = [float(v) for v in sec["fields"].split(",") if v.strip()]
    elif "field_seed" in sec:
        h = sample_fields(sec.getint("field_seed"), n)
    else:
        h = [0.0] * n  # no field term
    return build_heisenberg(n, J, h)


def sample_fields(seed: int, n: int) -> list[float]:
    """``n`` i.i.d. fields from Unif[-1, 1], reproducible per seed."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=n).tolist()
