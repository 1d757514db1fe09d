"""Hot loops, compiled when the Cython extension is built.

The compiled module is used when importable; set ``SWAGG_PURE_PYTHON=1`` to
force the numpy/pure-Python fallback. ``BACKEND`` names the active one.
"""

import os

from . import _pykernels

_NAMES = (
    "window_aggregates_timecut",
    "window_aggregates_sparse",
    "exit_expectations",
    "best_split_class",
    "best_split_reg",
)

try:
    if os.environ.get("SWAGG_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from . import _ckernels as _active
    BACKEND = "cython"
except ImportError:
    _active = _pykernels
    BACKEND = "python"


def backends():
    """Map of every importable backend module by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


window_aggregates_timecut = _active.window_aggregates_timecut
window_aggregates_sparse = _active.window_aggregates_sparse
exit_expectations = _active.exit_expectations
best_split_class = _active.best_split_class
best_split_reg = _active.best_split_reg
