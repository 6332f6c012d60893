"""Backend selection for the O(n^2) quadrature sums.

The compiled extension is used when it imports; set ``WAVECREST_PURE_PYTHON=1``
to force the numpy fallback. ``BACKEND`` names the active implementation.
"""
import os

from . import _kernels_py

_NAMES = (
    "cauchy",
    "cauchy_diff",
    "imcot_diff",
    "square_diff",
    "abs2_diff",
    "cot_matrix",
    "dlp_matrix",
)


def _load():
    if os.environ.get("WAVECREST_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels
    except ImportError:
        return _kernels_py, "python"
    return _kernels, "compiled"


_impl, BACKEND = _load()

cauchy = _impl.cauchy
cauchy_diff = _impl.cauchy_diff
imcot_diff = _impl.imcot_diff
square_diff = _impl.square_diff
abs2_diff = _impl.abs2_diff
cot_matrix = _impl.cot_matrix
dlp_matrix = _impl.dlp_matrix


def implementations():
    """Both backends keyed by name; the compiled entry is None when unavailable."""
    try:
        from . import _kernels
    except ImportError:
        _kernels = None
    return {"python": _kernels_py, "compiled": _kernels}
