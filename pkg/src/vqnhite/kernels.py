"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``VQNHITE_BACKEND=python`` to force the fallback at import time, or call
:func:`set_backend` / :func:`use_backend` at runtime.
"""

from __future__ import annotations

import contextlib
import os
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

_BACKENDS: dict[str, ModuleType] = {"python": _kernels_py}
if _kernels_c is not None:
    _BACKENDS["cython"] = _kernels_c


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _default() -> ModuleType:
    requested = os.environ.get("VQNHITE_BACKEND", "").lower()
    if requested:
        if requested not in _BACKENDS:
            raise ImportError(f"kernel backend {requested!r} unavailable; have {available_backends()}")
        return _BACKENDS[requested]
    return _BACKENDS.get("cython", _kernels_py)


impl: ModuleType = _default()


def backend_name() -> str:
    return impl.NAME


def set_backend(name: str) -> None:
    global impl
    if name not in _BACKENDS:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available_backends()}")
    impl = _BACKENDS[name]


@contextlib.contextmanager
def use_backend(name: str):
    previous = impl.NAME
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
