"""Pure numpy versions of the hot kernels.

Loops run over the summation index so that every entry is accumulated in the
same order as the compiled kernels; results match them bit for bit.
"""
import numpy as np


def gram(a, b):
    """Inner products ``a @ b.T``, each entry summed in coordinate order."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise ValueError("column counts differ")
    out = np.zeros((a.shape[0], b.shape[0]))
    for k in range(a.shape[1]):
        out += a[:, k, None] * b[None, :, k]
    return out


def quadratic_forms(w, v, d=None):
    """Row-wise ``v W v^T - d . v`` for a symmetric ``w``."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    nrow, m = v.shape
    if w.shape != (m, m):
        raise ValueError("weight matrix does not match vector length")
    u = np.zeros((nrow, m))
    for b in range(m):
        u += v[:, b, None] * w[b][None, :]
    q = np.zeros(nrow)
    for a in range(m):
        q += v[:, a] * u[:, a]
    if d is not None:
        d = np.ascontiguousarray(d, dtype=np.float64)
        if d.shape != (m,):
            raise ValueError("linear term does not match vector length")
        lin = np.zeros(nrow)
        for a in range(m):
            lin += d[a] * v[:, a]
        q = q - lin
    return q
