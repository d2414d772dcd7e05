# cython: language_level=3
"""Compiled hot kernels.

Every accumulation runs in the same sequential order as ``_fallback`` so the
two backends return bit-identical results. Both kernels release the GIL.
"""
import numpy as np

cimport cython


def gram(const double[:, ::1] a, const double[:, ::1] b):
    """Inner products ``a @ b.T``, each entry summed in coordinate order."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], p = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double aik
    if b.shape[1] != p:
        raise ValueError("column counts differ")
    bt_arr = np.ascontiguousarray(np.asarray(b).T)
    out_arr = np.zeros((na, nb), dtype=np.float64)
    cdef const double[:, ::1] bt = bt_arr
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(na):
            for k in range(p):
                aik = a[i, k]
                for j in range(nb):
                    out[i, j] += aik * bt[k, j]
    return out_arr


def quadratic_forms(const double[:, ::1] w, const double[:, ::1] v, d=None):
    """Row-wise ``v W v^T - d . v`` for a symmetric ``w``."""
    cdef Py_ssize_t nrow = v.shape[0], m = v.shape[1]
    cdef Py_ssize_t r, a, b
    cdef double vb, q, lin
    cdef bint has_d = d is not None
    if w.shape[0] != m or w.shape[1] != m:
        raise ValueError("weight matrix does not match vector length")
    d_arr = np.zeros(m) if d is None else np.ascontiguousarray(d, dtype=np.float64)
    if d_arr.shape[0] != m:
        raise ValueError("linear term does not match vector length")
    cdef const double[::1] dv = d_arr
    u_arr = np.empty(m, dtype=np.float64)
    out_arr = np.empty(nrow, dtype=np.float64)
    cdef double[::1] u = u_arr
    cdef double[::1] out = out_arr
    with nogil:
        for r in range(nrow):
            for a in range(m):
                u[a] = 0.0
            for b in range(m):
                vb = v[r, b]
                for a in range(m):
                    u[a] += vb * w[b, a]
            q = 0.0
            for a in range(m):
                q += v[r, a] * u[a]
            if has_d:
                lin = 0.0
                for a in range(m):
                    lin += dv[a] * v[r, a]
                q = q - lin
            out[r] = q
    return out_arr
