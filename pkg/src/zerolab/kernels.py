"""Backend selection for the hot stepping kernels.

The time loop spends nearly all of its time solving tridiagonal systems.
A compiled Cython extension provides those kernels; a NumPy/SciPy fallback
keeps the package fully functional when no C toolchain is available.  Set
``ZERO_LAB_PURE=1`` to force the fallback.  ``benchmarks/bench_kernels.py``
compares the two.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

import numpy as np
import scipy.linalg


def _tridiag_solve_py(lower, diag, upper, rhs):
    """Banded LAPACK solve; storage convention as in the compiled kernel."""
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return scipy.linalg.solve_banded(
        (1, 1), ab, rhs, overwrite_ab=True, check_finite=False
    )


def _tridiag_apply_py(lower, diag, upper, vec):
    out = diag * vec
    out[:-1] += upper[:-1] * vec[1:]
    out[1:] += lower[1:] * vec[:-1]
    return out


try:
    from . import _kernels
except ImportError:
    _kernels = None

_FORCE_PURE = os.environ.get("ZERO_LAB_PURE", "") not in ("", "0")

if _kernels is not None and not _FORCE_PURE:
    BACKEND = "compiled"
    tridiag_solve = _kernels.tridiag_solve
    tridiag_apply = _kernels.tridiag_apply
else:
    BACKEND = "numpy"
    tridiag_solve = _tridiag_solve_py
    tridiag_apply = _tridiag_apply_py


def available_backends():
    """Names of the usable backends, compiled first when it is present."""
    names = []
    if _kernels is not None:
        names.append("compiled")
    names.append("numpy")
    return names


def backend_functions(name):
    if name == "compiled":
        if _kernels is None:
            raise RuntimeError("compiled kernels are not available")
        return _kernels.tridiag_solve, _kernels.tridiag_apply
    if name == "numpy":
        return _tridiag_solve_py, _tridiag_apply_py
    raise ValueError(f"unknown kernel backend {name!r}")


@contextmanager
def use_backend(name):
    """Temporarily rebind the module-level kernels (used by the benchmark)."""
    global tridiag_solve, tridiag_apply, BACKEND
    saved = (tridiag_solve, tridiag_apply, BACKEND)
    tridiag_solve, tridiag_apply = backend_functions(name)
    BACKEND = name
    try:
        yield
    finally:
        tridiag_solve, tridiag_apply, BACKEND = saved
