"""Backend selection for the vertical integration hot loop.

Two interchangeable implementations exist: a numba-compiled one
(_vertical_numba) and a pure-numpy one (_vertical_numpy).  Selection order:

  * HALFSPACE_NS_BACKEND=numpy  forces the numpy path,
  * HALFSPACE_NS_BACKEND=numba  forces numba (ImportError if unavailable),
  * unset: numba when importable, numpy otherwise.

HALFSPACE_NS_THREADS=<k> caps the numba thread count.  Both backends must
produce identical results to ~1e-13; tests enforce this.
"""

from __future__ import annotations

import os

import numpy as np

from . import _vertical_numpy

_BACKEND_ENV = "HALFSPACE_NS_BACKEND"
_THREADS_ENV = "HALFSPACE_NS_THREADS"

_selected: str | None = None
_numba_mod = None


def _load_numba_backend():
    global _numba_mod
    if _numba_mod is None:
        import numba

        threads = os.environ.get(_THREADS_ENV, "").strip()
        if threads:
            numba.set_num_threads(max(1, int(threads)))
        from . import _vertical_numba

        _numba_mod = _vertical_numba
    return _numba_mod


def backend_name() -> str:
    """Resolve (once) and return the active backend name, 'numba' or 'numpy'."""
    global _selected
    if _selected is None:
        choice = os.environ.get(_BACKEND_ENV, "").strip().lower()
        if choice in ("", "auto"):
            try:
                _load_numba_backend()
                _selected = "numba"
            except ImportError:
                _selected = "numpy"
        elif choice == "numpy":
            _selected = "numpy"
        elif choice == "numba":
            _load_numba_backend()
            _selected = "numba"
        else:
            raise ValueError(
                f"{_BACKEND_ENV} must be 'numba' or 'numpy', got {choice!r}"
            )
    return _selected


def vertical_apply(
    j: int,
    sign: int,
    kappa: np.ndarray,
    g_slabs: np.ndarray,
    g_tail: np.ndarray | None,
    edges: np.ndarray,
    heights: np.ndarray,
    backend: str | None = None,
) -> np.ndarray:
    """Dispatch one (kernel, sign) vertical integration to the active backend.

    See _vertical_numpy.vertical_apply for the argument contract.  `backend`
    overrides the environment selection for this call (used by the equivalence
    tests and the benchmark).
    """
    name = backend if backend is not None else backend_name()
    if name == "numba":
        return _load_numba_backend().vertical_apply(
            j, sign, kappa, g_slabs, g_tail, edges, heights
        )
    if name == "numpy":
        return _vertical_numpy.vertical_apply(
            j, sign, kappa, g_slabs, g_tail, edges, heights
        )
    raise ValueError(f"unknown backend {name!r}")


def warmup() -> str:
    """Trigger jit compilation on a tiny problem so timed runs are steady."""
    name = backend_name()
    kappa = np.array([1.0, 2.0])
    g = np.array([[1.0 + 0.5j, -0.25j], [0.75, 1.0 + 1.0j]], dtype=np.complex128)
    tail = np.array([0.5, -0.5j], dtype=np.complex128)
    edges = np.array([0.0, 0.5, 1.0])
    heights = np.array([0.25, 0.75])
    for j in range(1, 6):
        for sign in (1, -1):
            vertical_apply(j, sign, kappa, g, tail, edges, heights, backend=name)
    return name
