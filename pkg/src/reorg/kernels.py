"""Kernel backend selection.

The compiled extension ``reorg._kernels`` is used when importable; otherwise
the numpy fallback in ``reorg._kernels_py``.  ``REORG_PURE=1`` forces the
fallback.  ``BACKEND`` names the active one.
"""
import os

from . import _kernels_py

if os.environ.get("REORG_PURE") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

count_k_of_n = _impl.count_k_of_n
count_blocks = _impl.count_blocks
restricted_growth_strings = _impl.restricted_growth_strings


def available_backends():
    """Name -> module for every backend importable in this environment."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
