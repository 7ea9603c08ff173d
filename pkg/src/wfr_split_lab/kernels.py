"""Kernel selection: compiled extension when available, NumPy fallback otherwise.

Set the environment variable ``WFR_SPLIT_LAB_PURE=1`` to force the pure
NumPy path (used by the benchmark and the equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

HAVE_COMPILED = False
_impl = _kernels_py

if not os.environ.get("WFR_SPLIT_LAB_PURE"):
    try:
        from . import _cc_kernel as _compiled

        _impl = _compiled
        HAVE_COMPILED = True
    except ImportError:
        pass


def advance_flux(values, b_plus, b_minus, r, n_substeps):
    return _impl.advance_flux(values, b_plus, b_minus, float(r), int(n_substeps))


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED else "numpy"
