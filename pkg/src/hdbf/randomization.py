"""The randomization test built on Rademacher sign flips of differenced rows.

Given the Gram cache of the differenced samples, each randomized statistic is
a quadratic form ``e' W e`` in a sign vector ``e``, so a draw costs
``O((m1 + m2)^2)`` regardless of the dimension.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .core_stats import GramCache, _check_pair, gram_from_data, t_cq_statistic
from .results import Method, TestResult, check_alpha, check_resamples, resampling_p_value
from .rng import TAG_SIGNS, RngSeed, as_seed, blocks, parallel_map

DEFAULT_B = 1000
DEFAULT_ALPHA = 0.05


class SignVector(NamedTuple):
    e1: np.ndarray
    e2: np.ndarray


def _sign_matrix(gram: GramCache, e) -> np.ndarray:
    if isinstance(e, tuple) and len(e) == 2 and np.ndim(e[0]) == 1:
        e1, e2 = np.asarray(e[0], dtype=np.float64), np.asarray(e[1], dtype=np.float64)
        if e1.size != gram.m1 or e2.size != gram.m2:
            raise ValueError(
                f"sign lengths ({e1.size}, {e2.size}) do not match the cache ({gram.m1}, {gram.m2})"
            )
        mat = np.concatenate([e1, e2])[None, :]
        batch = False
    else:
        batch = np.ndim(e) == 2
        mat = np.atleast_2d(np.asarray(e, dtype=np.float64))
        if mat.shape[1] != gram.m1 + gram.m2:
            raise ValueError(f"sign vectors have length {mat.shape[1]}, expected {gram.m1 + gram.m2}")
    if not np.all(np.abs(mat) == 1.0):
        raise ValueError("sign vectors may only contain -1 and +1")
    return np.ascontiguousarray(mat), batch


def randomized_statistic(gram: GramCache, e):
    """Sign-flipped ``T_CQ`` of the differenced samples.

    ``e`` is a :class:`SignVector`, a flat vector of length ``m1 + m2`` (group 1
    first), or a ``B x (m1 + m2)`` matrix of sign vectors; the latter returns an
    array of ``B`` statistics.
    """
    mat, batch = _sign_matrix(gram, e)
    out = kernels.quadratic_forms(gram.weights, mat)
    return out if batch else float(out[0])


def conditional_sd(gram: GramCache) -> float:
    """Exact standard deviation of the randomized statistic over uniform signs, given the data."""
    m1, m2 = gram.m1, gram.m2
    iu1 = np.triu_indices(m1, 1)
    iu2 = np.triu_indices(m2, 1)
    var = (
        4.0 * np.sum(gram.g11[iu1] ** 2) / (m1 * (m1 - 1.0)) ** 2
        + 4.0 * np.sum(gram.g22[iu2] ** 2) / (m2 * (m2 - 1.0)) ** 2
        + 4.0 * np.sum(gram.g12**2) / (m1 * float(m2)) ** 2
    )
    return math.sqrt(var)


def draw_signs(seed: RngSeed, block: int, count: int, m: int) -> np.ndarray:
    """``count`` uniform sign vectors of length ``m`` from RNG block ``block``."""
    bits = seed.generator(TAG_SIGNS, block).integers(0, 2, size=(count, m), dtype=np.int8)
    return 1.0 - 2.0 * bits


def randomized_draws(gram: GramCache, b: int, seed=None, workers: int | None = None) -> np.ndarray:
    """``b`` independent draws of the randomized statistic."""
    b = check_resamples(b)
    seed = as_seed(seed)
    w = gram.weights
    m = w.shape[0]

    def run(block):
        idx, start, stop = block
        return kernels.quadratic_forms(w, draw_signs(seed, idx, stop - start, m))

    return np.concatenate(parallel_map(run, blocks(b), workers))


def quantile_min(values, q: float) -> float:
    """``min{x : F(x) >= q}`` for the empirical CDF of ``values``."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = v.size
    k = max(1, math.ceil(q * n))
    while k > 1 and (k - 1) / n >= q:
        k -= 1
    while k < n and k / n < q:
        k += 1
    return float(v[k - 1])


def randomization_quantile(gram: GramCache, b: int, q: float, seed=None, workers: int | None = None) -> float:
    """Empirical ``q``-quantile (min-attainment convention) of ``b`` randomized draws."""
    if not 0.0 < float(q) < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    return quantile_min(randomized_draws(gram, b, seed, workers), q)


def randomization_test(
    x1, x2, b: int = DEFAULT_B, alpha: float = DEFAULT_ALPHA, seed=None, workers: int | None = None
) -> TestResult:
    """Test equal means by calibrating ``T_CQ`` against sign flips of the differenced data.

    Parameters
    ----------
    x1, x2 : array_like, shape (n1, p) and (n2, p)
        Observations of each group as rows; both groups need at least 4 rows.
    b : int
        Number of sign-flip draws.
    alpha : float
        Test level; the null is rejected when the p-value is at most ``alpha``.
    seed : int or RngSeed, optional
        Fixes every sign draw. Results do not depend on ``workers``.

    Returns
    -------
    TestResult
        p-value ``(1 + #{T_i >= T_obs}) / (b + 1)``.
    """
    x1, x2 = _check_pair(x1, x2, 4)
    alpha = check_alpha(alpha)
    b = check_resamples(b)
    seed = as_seed(seed)
    observed = t_cq_statistic(x1, x2)
    draws = randomized_draws(gram_from_data(x1, x2), b, seed, workers)
    p = resampling_p_value(draws, observed)
    return TestResult(observed, p, p <= alpha, alpha, Method.NEW, b, seed.seed, seed.stream)
