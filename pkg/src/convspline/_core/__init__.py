"""Numerical core with a compiled fast path and a pure-NumPy fallback.

The Cython extension ``convspline._core._fast`` implements the hot kernels
(time-marching recursions, stability-coefficient recursions and the
triangle-pair quadrature bins of the retarded-matrix assembly).  If it is not
available the NumPy reference implementation ``_ref`` is used; both expose the
same functions and are kept interchangeable (see tests/test_backends.py and
benchmarks/bench_core.py).

Set ``CONVSPLINE_FORCE_BACKEND=python`` (or ``compiled``) to override the
default selection.
"""

import os

_requested = os.environ.get("CONVSPLINE_FORCE_BACKEND", "").strip().lower()

if _requested in ("python", "ref", "numpy"):
    from . import _ref as _impl

    BACKEND = "python"
elif _requested in ("compiled", "fast", "cython"):
    from . import _fast as _impl  # type: ignore[no-redef]

    BACKEND = "compiled"
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - build-dependent
        from . import _ref as _impl

        BACKEND = "python"

march_core = _impl.march_core
pn_core = _impl.pn_core
batch_pair_bins = _impl.batch_pair_bins

__all__ = ["BACKEND", "march_core", "pn_core", "batch_pair_bins"]
