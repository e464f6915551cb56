"""Backend selection for the blade-product kernels.

The compiled module is used when it imports; setting ``LLL_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

from . import _pykernels

try:
    if os.environ.get("LLL_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _ckernels as _kernels

    BACKEND = "cython"
except ImportError:
    _kernels = _pykernels
    BACKEND = "python"

blade_sign = _kernels.blade_sign
product_table = _kernels.product_table
field_product = _kernels.field_product


def backends():
    """Return the available kernel modules keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
