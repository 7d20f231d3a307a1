"""Backend selection for the dominance kernels.

The compiled extension is used when it was built; otherwise the numpy
versions in ``_kernels_py`` are used. ``VMOF_PURE_PYTHON=1`` forces the
fallback, which is how the benchmark and the equivalence tests reach it.
"""

import os

import numpy as np

from vmof import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("VMOF_PURE_PYTHON"):
    try:
        from vmof import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def _as_c(F) -> np.ndarray:
    return np.ascontiguousarray(F, dtype=np.float64)


def nondominated_ranks(F) -> np.ndarray:
    """Dominance depth of every row (0 = first front)."""
    return _impl.nondominated_ranks(_as_c(F))


def nondominated_mask(F) -> np.ndarray:
    """True for rows not dominated by any other row."""
    return _impl.nondominated_mask(_as_c(F))


def dominator_counts(F) -> np.ndarray:
    """Number of rows dominating each row."""
    return _impl.dominator_counts(_as_c(F))


def crowding_distance(F) -> np.ndarray:
    return _impl.crowding_distance(_as_c(F))
