"""Kernel backend selection.

Hot grid kernels (component labeling, phase unwrapping, nearest-cell
extension) exist in two variants: numba @njit loops and a vectorized
numpy path. The active variant is chosen by the BANACH_REDUCE_BACKEND
environment variable ("numba" or "numpy"); default is numba when it
imports, numpy otherwise. BANACH_REDUCE_THREADS caps numba parallelism.
"""

import os

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    numba = None
    NUMBA_AVAILABLE = False

_VALID = ("numba", "numpy")


def _default_backend():
    env = os.environ.get("BANACH_REDUCE_BACKEND", "").strip().lower()
    if env in _VALID:
        if env == "numba" and not NUMBA_AVAILABLE:
            raise RuntimeError("BANACH_REDUCE_BACKEND=numba but numba is not importable")
        return env
    return "numba" if NUMBA_AVAILABLE else "numpy"


_backend = _default_backend()

if NUMBA_AVAILABLE:
    threads = os.environ.get("BANACH_REDUCE_THREADS")
    if threads:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))


def get_backend():
    return _backend


def set_backend(name):
    """Switch the kernel backend at runtime (used by tests and benchmarks)."""
    global _backend
    if name not in _VALID:
        raise ValueError(f"unknown backend {name!r}, expected one of {_VALID}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not importable")
    _backend = name
