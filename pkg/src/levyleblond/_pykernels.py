"""Pure numpy blade-product kernels; fallback for ``_ckernels``."""
import numpy as np


def blade_sign(a: int, b: int, n: int) -> int:
    """Sign of the product of two blades given as bit patterns."""
    s = 0
    x = a >> 1
    while x:
        s += (x & b).bit_count()
        x >>= 1
    s += (a & b & ((1 << (n + 1)) - 1)).bit_count()
    return -1 if s & 1 else 1


def product_table(xb, yb, n: int):
    """Sign table, output blades and output index table for two blade lists."""
    xb = [int(v) for v in xb]
    yb = [int(v) for v in yb]
    signs = np.array([[blade_sign(a, b, n) for b in yb] for a in xb], dtype=np.int8)
    prod = np.array([[a ^ b for b in yb] for a in xb], dtype=np.int64).reshape(len(xb), len(yb))
    out_blades, inverse = np.unique(prod.ravel(), return_inverse=True)
    return signs.reshape(len(xb), len(yb)), out_blades, inverse.reshape(len(xb), len(yb)).astype(np.int64)


def field_product(xb, x, yb, y, n: int):
    """Pointwise geometric product of two blade-expanded arrays.

    ``x`` has shape ``(S, Bx)`` and ``y`` shape ``(S, By)``; returns the
    output blade list and an ``(S, Bo)`` complex array.
    """
    signs, out_blades, index = product_table(xb, yb, n)
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    out = np.zeros((x.shape[0], out_blades.shape[0]), dtype=np.complex128)
    for i in range(x.shape[1]):
        xi = x[:, i]
        if not xi.any():
            continue
        # one column of the output per y-blade; indices within a row are distinct
        out[:, index[i]] += xi[:, None] * (signs[i].astype(np.float64) * y)
    return out_blades, out
