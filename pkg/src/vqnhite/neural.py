"""Feed-forward network defining the diagonal non-unitary operator ``f = sum_s f(s)|s><s|``.

Bits enter as ``2b - 1``; hidden layers use tanh; the scalar output ``z`` is
mapped to ``f = exp(z)`` so a zeroed last layer gives the identity operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np


def default_widths(n: int) -> list[int]:
    return [n, n, max(1, n // 2), 1]


@lru_cache(maxsize=16)
def all_bitstrings(n: int) -> np.ndarray:
    """``(2**n, n)`` array of bits; row ``i`` is the binary expansion of ``i`` (qubit 0 first)."""
    idx = np.arange(1 << n)[:, None]
    shifts = np.arange(n - 1, -1, -1)[None, :]
    out = (idx >> shifts) & 1
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class MLPParams:
    """Weights ``W_l`` (shape out x in) and biases ``b_l`` for each layer."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need matching, non-empty weight and bias lists")
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.shape != (W.shape[0],):
                raise ValueError(f"layer {l}: weight {W.shape} and bias {b.shape} do not match")
            if l and W.shape[1] != self.weights[l - 1].shape[0]:
                raise ValueError(f"layer {l} input width {W.shape[1]} != previous output")
        if self.weights[-1].shape[0] != 1:
            raise ValueError("output layer must be scalar")

    @property
    def widths(self) -> list[int]:
        return [self.weights[0].shape[1]] + [W.shape[0] for W in self.weights]

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[1]

    @property
    def size(self) -> int:
        return sum(W.size + b.size for W, b in zip(self.weights, self.biases))

    def flatten(self) -> np.ndarray:
        """Layer-major flat vector: ``W_0`` (row-major), ``b_0``, ``W_1``, ``b_1``, ..."""
        parts = []
        for W, b in zip(self.weights, self.biases):
            parts += [W.ravel(), b]
        return np.concatenate(parts).astype(float)

    @classmethod
    def unflatten(cls, vec: np.ndarray, widths: Sequence[int]) -> MLPParams:
        vec = np.asarray(vec, dtype=float)
        weights, biases = [], []
        pos = 0
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            weights.append(vec[pos : pos + fan_in * fan_out].reshape(fan_out, fan_in).copy())
            pos += fan_in * fan_out
            biases.append(vec[pos : pos + fan_out].copy())
            pos += fan_out
        if pos != vec.size:
            raise ValueError(f"flat vector has {vec.size} entries, widths need {pos}")
        return cls(tuple(weights), tuple(biases))

    def with_flat(self, vec: np.ndarray) -> MLPParams:
        return MLPParams.unflatten(vec, self.widths)


def init_params(seed, n: int, widths: Sequence[int] | None = None) -> MLPParams:
    """Hidden layers uniform on ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]``; last layer zero."""
    widths = list(widths) if widths is not None else default_widths(n)
    if widths[0] != n:
        raise ValueError("input width must equal the qubit count")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    n_layers = len(widths) - 1
    for l, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        if l == n_layers - 1:
            weights.append(np.zeros((fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        else:
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
    return MLPParams(tuple(weights), tuple(biases))


def _encode(bits: np.ndarray) -> np.ndarray:
    return 2.0 * np.asarray(bits, dtype=float) - 1.0


def _forward(params: MLPParams, bits: np.ndarray):
    acts = [_encode(bits)]
    for W, b in zip(params.weights[:-1], params.biases[:-1]):
        acts.append(np.tanh(acts[-1] @ W.T + b))
    z = acts[-1] @ params.weights[-1].T + params.biases[-1]
    return acts, z[:, 0]


def nn_values(params: MLPParams, bits: np.ndarray | None = None) -> np.ndarray:
    """``f(s)`` for each row of ``bits`` (default: all ``2**n`` bitstrings in index order)."""
    if bits is None:
        bits = all_bitstrings(params.n_inputs)
    _, z = _forward(params, np.atleast_2d(bits))
    return np.exp(z)


def nn_forward(params: MLPParams, s) -> float:
    bits = np.array([int(c) for c in s]) if isinstance(s, str) else np.asarray(s)
    if bits.shape != (params.n_inputs,):
        raise ValueError(f"bitstring length {bits.shape} != {params.n_inputs}")
    return float(nn_values(params, bits[None, :])[0])


def nn_jacobian(params: MLPParams, bits: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Values and gradients by reverse-mode differentiation.

    Returns ``(f, grad)`` with ``grad[k, s] = df(s)/dphi_k`` in :meth:`MLPParams.flatten` order.
    """
    if bits is None:
        bits = all_bitstrings(params.n_inputs)
    bits = np.atleast_2d(bits)
    acts, z = _forward(params, bits)
    f = np.exp(z)
    B = bits.shape[0]
    grads_W: list[np.ndarray] = []
    grads_b: list[np.ndarray] = []
    delta = f[:, None]  # d f / d z for each sample, shape (B, 1)
    for l in range(len(params.weights) - 1, -1, -1):
        grads_W.append(delta[:, :, None] * acts[l][:, None, :])
        grads_b.append(delta)
        if l:
            delta = (delta @ params.weights[l]) * (1.0 - acts[l] ** 2)
    grads_W.reverse()
    grads_b.reverse()
    cols = []
    for gW, gb in zip(grads_W, grads_b):
        cols += [gW.reshape(B, -1), gb]
    return f, np.concatenate(cols, axis=1).T


def nn_gradient(params: MLPParams, s) -> np.ndarray:
    bits = np.array([int(c) for c in s]) if isinstance(s, str) else np.asarray(s)
    if bits.shape != (params.n_inputs,):
        raise ValueError(f"bitstring length {bits.shape} != {params.n_inputs}")
    return nn_jacobian(params, bits[None, :])[1][:, 0]


def apply_f(params: MLPParams, psi: np.ndarray) -> np.ndarray:
    """Multiply amplitude ``s`` by ``f(s)``; the result is generally unnormalized."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[-1] != 1 << params.n_inputs:
        raise ValueError("state dimension does not match network input width")
    return nn_values(params) * psi
