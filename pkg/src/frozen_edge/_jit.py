"""Backend switch for the hot kernels.

Every kernel in the package exists twice: a numba-compiled version and a
pure-numpy version. ``FROZEN_EDGE_BACKEND=numpy`` (or a missing numba
install) selects the numpy path; anything else selects numba.
``FROZEN_EDGE_THREADS`` caps the number of worker threads.
"""
from __future__ import annotations

import contextlib
import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

_requested = os.environ.get("FROZEN_EDGE_BACKEND", "numba").strip().lower()
_backend = "numba" if (HAVE_NUMBA and _requested != "numpy") else "numpy"


def max_threads() -> int:
    """Thread cap from FROZEN_EDGE_THREADS (defaults to the CPU count)."""
    raw = os.environ.get("FROZEN_EDGE_THREADS")
    ncpu = os.cpu_count() or 1
    if not raw:
        return ncpu
    try:
        return max(1, min(int(raw), ncpu))
    except ValueError:
        return ncpu


if HAVE_NUMBA:
    with contextlib.suppress(Exception):
        numba.set_num_threads(min(max_threads(), numba.config.NUMBA_NUM_THREADS))


def njit(func=None, **kwargs):
    """``numba.njit(cache=True, nogil=True)`` when numba is importable, identity otherwise."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return numba.njit(**kwargs)(f)

    return wrap(func) if func is not None else wrap


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    name = name.lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextlib.contextmanager
def use_backend(name: str):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def pick(numba_impl, numpy_impl):
    """Return the implementation matching the active backend."""
    return numba_impl if _backend == "numba" else numpy_impl
