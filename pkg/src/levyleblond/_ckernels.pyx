# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled blade-product kernels (same API as ``_pykernels``)."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _sign(unsigned long long a, unsigned long long b, int n) nogil:
    cdef int s = 0
    cdef unsigned long long x = a >> 1
    while x:
        s += __builtin_popcountll(x & b)
        x >>= 1
    s += __builtin_popcountll(a & b & ((1ULL << (n + 1)) - 1))
    return -1 if (s & 1) else 1


def blade_sign(long long a, long long b, int n):
    """Sign of the product of two blades given as bit patterns."""
    return _sign(<unsigned long long>a, <unsigned long long>b, n)


def product_table(xb, yb, int n):
    """Sign table, output blades and output index table for two blade lists."""
    cdef const cnp.int64_t[:] xa = np.ascontiguousarray(xb, dtype=np.int64)
    cdef const cnp.int64_t[:] ya = np.ascontiguousarray(yb, dtype=np.int64)
    cdef Py_ssize_t bx = xa.shape[0], by = ya.shape[0], i, j
    signs = np.empty((bx, by), dtype=np.int8)
    prod = np.empty((bx, by), dtype=np.int64)
    cdef cnp.int8_t[:, :] sv = signs
    cdef cnp.int64_t[:, :] pv = prod
    for i in range(bx):
        for j in range(by):
            sv[i, j] = _sign(<unsigned long long>xa[i], <unsigned long long>ya[j], n)
            pv[i, j] = xa[i] ^ ya[j]
    out_blades, inverse = np.unique(prod.ravel(), return_inverse=True)
    return signs, out_blades, inverse.reshape(bx, by).astype(np.int64)


def field_product(xb, x, yb, y, int n):
    """Pointwise geometric product of two blade-expanded arrays.

    ``x`` has shape ``(S, Bx)`` and ``y`` shape ``(S, By)``; returns the
    output blade list and an ``(S, Bo)`` complex array.
    """
    signs, out_blades, index = product_table(xb, yb, n)
    cdef cnp.int8_t[:, :] sv = signs
    cdef cnp.int64_t[:, :] iv = index
    cdef const double complex[:, :] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef const double complex[:, :] yv = np.ascontiguousarray(y, dtype=np.complex128)
    cdef Py_ssize_t S = xv.shape[0], bx = xv.shape[1], by = yv.shape[1]
    out = np.zeros((S, out_blades.shape[0]), dtype=np.complex128)
    cdef double complex[:, :] ov = out
    cdef Py_ssize_t s, i, j
    cdef double complex xi
    with nogil:
        for s in range(S):
            for i in range(bx):
                xi = xv[s, i]
                if xi == 0:
                    continue
                for j in range(by):
                    if sv[i, j] > 0:
                        ov[s, iv[i, j]] += xi * yv[s, j]
                    else:
                        ov[s, iv[i, j]] -= xi * yv[s, j]
    return out_blades, out
