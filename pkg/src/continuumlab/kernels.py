"""Kernel backend selection.

The compiled extension (continuumlab._ckernels) and the pure-Python module
(_kernels_py) implement the same sampling functions with bit-identical
results; whichever is available is picked at import time.  Set
CONTINUUMLAB_BACKEND=c or =py to force a choice (c raises if the extension
was not built).
"""

import os

from . import _kernels_py

_choice = os.environ.get("CONTINUUMLAB_BACKEND", "auto")
if _choice not in ("auto", "c", "py"):
    raise RuntimeError(f"CONTINUUMLAB_BACKEND must be auto, c, or py, got {_choice!r}")

_impl = None
if _choice in ("auto", "c"):
    try:
        from . import _ckernels as _impl
    except ImportError:
        if _choice == "c":
            raise
        _impl = None
if _impl is None:
    _impl = _kernels_py

BACKEND = "c" if _impl is not _kernels_py else "py"

mix64 = _impl.mix64
chain_key = _impl.chain_key
u01 = _impl.u01
norm_ppf = _impl.norm_ppf
float_bits = _impl.float_bits
grid_values = _impl.grid_values
point_value = _impl.point_value
interval_extrema = _impl.interval_extrema
walk_values = _impl.walk_values

TAG_INC_POS = _kernels_py.TAG_INC_POS
TAG_INC_NEG = _kernels_py.TAG_INC_NEG
TAG_MID = _kernels_py.TAG_MID
TAG_PT = _kernels_py.TAG_PT
TAG_BRMAX = _kernels_py.TAG_BRMAX
TAG_BRMIN = _kernels_py.TAG_BRMIN
TAG_WALK = _kernels_py.TAG_WALK


def backend_modules():
    """All importable backend modules, for parity tests and benchmarks."""
    mods = {"py": _kernels_py}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        mods["c"] = _ckernels
    return mods
