"""Kernel backend selection.

Hot loops exist twice: a numba @njit build and a pure-numpy build with identical
semantics (bitwise identical outputs). The env var LEBDYN_BACKEND picks one at
import time ("numba" or "numpy"); numba is the default when it imports cleanly.
`set_backend` re-points the dispatch at runtime, which the equivalence tests and
the benchmark use.
"""

from __future__ import annotations

import os

from .errors import UsageError

_BACKENDS = ("numba", "numpy")
_active = None
_active_name = ""


def _load(name: str):
    if name == "numpy":
        from . import _kernels_numpy as mod
        return mod
    if name == "numba":
        from . import _kernels_numba as mod
        return mod
    raise UsageError(f"unknown backend {name!r}, expected one of {_BACKENDS}")


def set_backend(name: str) -> None:
    global _active, _active_name
    _active = _load(name)
    _active_name = name


def backend_name() -> str:
    if _active is None:
        _init_default()
    return _active_name


def kernels():
    """Return the active kernel module."""
    if _active is None:
        _init_default()
    return _active


def _init_default() -> None:
    requested = os.environ.get("LEBDYN_BACKEND", "").strip().lower()
    if requested:
        set_backend(requested)
        return
    try:
        set_backend("numba")
    except ImportError:
        set_backend("numpy")
