"""Two-sample statistics, the differencing transform and the Gram cache.

Observations are rows. Every statistic here is a function of inner products
between rows, so it is invariant under rotations of the coordinate system.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels


def as_data_matrix(x, name: str = "x") -> np.ndarray:
    """Validate ``x`` as an ``n x p`` float64 matrix; 1-D input is one column."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got {arr.ndim} dimensions")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def _check_pair(x1, x2, min_rows: int):
    x1 = as_data_matrix(x1, "x1")
    x2 = as_data_matrix(x2, "x2")
    if x1.shape[1] != x2.shape[1]:
        raise ValueError(f"dimension mismatch: {x1.shape[1]} vs {x2.shape[1]} columns")
    for name, x in (("x1", x1), ("x2", x2)):
        if x.shape[0] < min_rows:
            raise ValueError(f"{name} needs at least {min_rows} rows, got {x.shape[0]}")
    return x1, x2


def tcq_weights(g11, g22, g12) -> np.ndarray:
    """Symmetric weight matrix ``W`` with ``T_CQ = 1' W 1``.

    Within-group blocks carry ``g / (m (m - 1))`` off the diagonal, the cross
    block carries ``-g / (m1 m2)``; the diagonal is zero.
    """
    m1, m2 = g11.shape[0], g22.shape[0]
    w = np.zeros((m1 + m2, m1 + m2))
    w[:m1, :m1] = g11 / (m1 * (m1 - 1.0))
    w[m1:, m1:] = g22 / (m2 * (m2 - 1.0))
    cross = g12 / (-(m1 * float(m2)))
    w[:m1, m1:] = cross
    w[m1:, :m1] = cross.T
    np.fill_diagonal(w, 0.0)
    return w


def t_cq_statistic(x1, x2) -> float:
    """Chen-Qin statistic: mean within-group cross products minus twice the between-group mean."""
    x1, x2 = _check_pair(x1, x2, 2)
    # shift invariant; centering keeps constant data at exactly zero
    centre = np.vstack([x1, x2]).mean(axis=0)
    x1, x2 = x1 - centre, x2 - centre
    w = tcq_weights(kernels.gram(x1, x1), kernels.gram(x2, x2), kernels.gram(x1, x2))
    return float(kernels.quadratic_forms(w, np.ones((1, w.shape[0])))[0])


def t_bs_statistic(x1, x2) -> float:
    """Bai-Saranadasa statistic ``||xbar1 - xbar2||^2 - n/(n1 n2) tr(S_pooled)``."""
    x1, x2 = _check_pair(x1, x2, 1)
    n1, n2 = x1.shape[0], x2.shape[0]
    n = n1 + n2
    if n < 3:
        raise ValueError(f"need n1 + n2 >= 3, got {n}")
    diff = x1.mean(axis=0) - x2.mean(axis=0)
    ss = ((x1 - x1.mean(axis=0)) ** 2).sum() + ((x2 - x2.mean(axis=0)) ** 2).sum()
    trace_pooled = ss / (n - 2)
    return float(diff @ diff - n / (n1 * n2) * trace_pooled)


@dataclass(frozen=True)
class DifferencedSample:
    """Rows ``(x[2i] - x[2i-1]) / 2`` (1-based) of one group; ``n`` is the source size."""

    rows: np.ndarray
    n: int

    @property
    def m(self) -> int:
        return self.rows.shape[0]


def difference_transform(x) -> DifferencedSample:
    """Pair consecutive observations and halve their differences.

    With an odd number of rows the last one is dropped.
    """
    x = as_data_matrix(x)
    n = x.shape[0]
    if n < 2:
        raise ValueError(f"differencing needs at least 2 rows, got {n}")
    m = n // 2
    rows = (x[1 : 2 * m : 2] - x[0 : 2 * m : 2]) / 2.0
    return DifferencedSample(np.ascontiguousarray(rows), n)


@dataclass(frozen=True)
class GramCache:
    """Inner products of differenced rows: within group 1, within group 2, across."""

    g11: np.ndarray
    g22: np.ndarray
    g12: np.ndarray
    n1: int
    n2: int

    @property
    def m1(self) -> int:
        return self.g11.shape[0]

    @property
    def m2(self) -> int:
        return self.g22.shape[0]

    @cached_property
    def weights(self) -> np.ndarray:
        return tcq_weights(self.g11, self.g22, self.g12)


def _as_differenced(xt) -> DifferencedSample:
    if isinstance(xt, DifferencedSample):
        return xt
    rows = as_data_matrix(xt, "differenced sample")
    return DifferencedSample(rows, 2 * rows.shape[0])


def build_gram(xt1, xt2) -> GramCache:
    xt1, xt2 = _as_differenced(xt1), _as_differenced(xt2)
    if xt1.rows.shape[1] != xt2.rows.shape[1]:
        raise ValueError(f"dimension mismatch: {xt1.rows.shape[1]} vs {xt2.rows.shape[1]} columns")
    for k, xt in ((1, xt1), (2, xt2)):
        if xt.m < 2:
            raise ValueError(f"group {k} has {xt.m} differenced rows; at least 2 are required")
    a, b = xt1.rows, xt2.rows
    return GramCache(kernels.gram(a, a), kernels.gram(b, b), kernels.gram(a, b), xt1.n, xt2.n)


def gram_from_data(x1, x2) -> GramCache:
    """Difference both groups and cache their inner products."""
    return build_gram(difference_transform(x1), difference_transform(x2))


def t_cq_differenced(gram: GramCache) -> float:
    """``T_CQ`` of the differenced samples, read off the cache."""
    w = gram.weights
    return float(kernels.quadratic_forms(w, np.ones((1, w.shape[0])))[0])
