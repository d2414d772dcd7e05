"""Baseline procedures built on the same statistic.

CQ standardizes ``T_CQ`` with the conditional sign-flip SD and uses the normal
quantile. EB and WB are the empirical and wild bootstraps of ``T_CQ`` on
group-centered data. The chi-square tests match the first two moments of a
scaled chi-square to plug-in estimates of ``tr(Psi)`` and ``Var(T_CQ)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import kernels
from .core_stats import GramCache, _check_pair, gram_from_data, t_cq_statistic, tcq_weights
from .randomization import conditional_sd
from .results import (
    DegenerateDataError,
    Method,
    TestResult,
    check_alpha,
    check_resamples,
    resampling_p_value,
)
from .rng import TAG_EB, TAG_WB, as_seed, blocks, parallel_map


def cq_test(x1, x2, alpha: float = 0.05) -> TestResult:
    """Normal approximation: reject when ``T_CQ / sd`` exceeds ``z_{1-alpha}``.

    ``sd`` is the conditional sign-flip SD of the differenced data. Raises
    :class:`DegenerateDataError` when it is zero.
    """
    x1, x2 = _check_pair(x1, x2, 4)
    alpha = check_alpha(alpha)
    t = t_cq_statistic(x1, x2)
    sd = conditional_sd(gram_from_data(x1, x2))
    if sd == 0.0:
        raise DegenerateDataError("estimated standard deviation of T_CQ is zero")
    z = t / sd
    return TestResult(t, float(stats.norm.sf(z)), bool(z > stats.norm.ppf(1.0 - alpha)), alpha, Method.CQ)


def _centered_weights(x1, x2):
    y1 = x1 - x1.mean(axis=0)
    y2 = x2 - x2.mean(axis=0)
    g11, g22 = kernels.gram(y1, y1), kernels.gram(y2, y2)
    w = tcq_weights(g11, g22, kernels.gram(y1, y2))
    n1, n2 = y1.shape[0], y2.shape[0]
    diag = np.concatenate([np.diag(g11) / (n1 * (n1 - 1.0)), np.diag(g22) / (n2 * (n2 - 1.0))])
    return w, diag


def _bootstrap(x1, x2, b, alpha, seed, workers, method):
    x1, x2 = _check_pair(x1, x2, 2)
    alpha = check_alpha(alpha)
    b = check_resamples(b)
    seed = as_seed(seed)
    n1, n2 = x1.shape[0], x2.shape[0]
    observed = t_cq_statistic(x1, x2)
    w, diag = _centered_weights(x1, x2)

    if method is Method.EB:
        # resampled T_CQ from multiplicity vectors c: c'Wc - c.diag(W) with the self products on the diagonal
        w_full = w.copy()
        np.fill_diagonal(w_full, diag)

        def run(block):
            idx, start, stop = block
            rng = seed.generator(TAG_EB, idx)
            k = stop - start
            counts = np.hstack(
                [rng.multinomial(n1, np.full(n1, 1.0 / n1), size=k), rng.multinomial(n2, np.full(n2, 1.0 / n2), size=k)]
            ).astype(np.float64)
            return kernels.quadratic_forms(w_full, counts, diag)

    else:

        def run(block):
            idx, start, stop = block
            return kernels.quadratic_forms(w, draw_wild_signs(seed, idx, stop - start, n1 + n2))

    draws = np.concatenate(parallel_map(run, blocks(b), workers))
    p = resampling_p_value(draws, observed)
    return TestResult(observed, p, p <= alpha, alpha, method, b, seed.seed, seed.stream)


def draw_wild_signs(seed, block, count, n):
    bits = seed.generator(TAG_WB, block).integers(0, 2, size=(count, n), dtype=np.int8)
    return 1.0 - 2.0 * bits


def empirical_bootstrap_test(x1, x2, b: int = 1000, alpha: float = 0.05, seed=None, workers=None) -> TestResult:
    """Resample centered rows with replacement within each group and recompute ``T_CQ``."""
    return _bootstrap(x1, x2, b, alpha, seed, workers, Method.EB)


def wild_bootstrap_test(x1, x2, b: int = 1000, alpha: float = 0.05, seed=None, workers=None) -> TestResult:
    """Multiply centered rows by independent Rademacher signs and recompute ``T_CQ``."""
    return _bootstrap(x1, x2, b, alpha, seed, workers, Method.WB)


@dataclass(frozen=True)
class Chi2Params:
    """``beta_scale * chi2(dof)`` with mean ``beta_scale * dof`` and variance ``2 beta_scale^2 dof``."""

    beta_scale: float
    dof: float


def chi2_params(trace: float, variance: float) -> Chi2Params:
    """Welch-Satterthwaite moment match to a mean ``trace`` and a variance ``variance``."""
    if not trace > 0.0:
        raise DegenerateDataError(f"trace estimate must be positive, got {trace}")
    if not variance > 0.0:
        raise DegenerateDataError(f"variance estimate must be positive, got {variance}")
    return Chi2Params(variance / (2.0 * trace), 2.0 * trace**2 / variance)


def psi_trace_hat(gram: GramCache) -> float:
    """Estimate ``tr(Psi)`` from self inner products of differenced rows.

    Each differenced row has expected squared norm ``tr(Sigma)/2``.
    """
    return float(
        2.0 / gram.n1 * np.mean(np.diag(gram.g11)) + 2.0 / gram.n2 * np.mean(np.diag(gram.g22))
    )


def chi2_params_from_psi_hat(gram: GramCache) -> Chi2Params:
    return chi2_params(psi_trace_hat(gram), conditional_sd(gram) ** 2)


def chi2_critical_value(params: Chi2Params, alpha: float, variant: str = "TCQ") -> float:
    """Rejection threshold: centered for ``T_CQ``, uncentered for ``||xbar1 - xbar2||^2``."""
    q = stats.chi2.isf(check_alpha(alpha), params.dof)
    variant = variant.upper()
    if variant == "TCQ":
        return params.beta_scale * (q - params.dof)
    if variant == "NORM":
        return params.beta_scale * q
    raise ValueError(f"unknown chi-square variant {variant!r}; use 'TCQ' or 'NORM'")


def chi2_test(x1, x2, alpha: float = 0.05, variant: str = "TCQ") -> TestResult:
    """Scaled chi-square calibration of ``T_CQ`` (``TCQ``) or of ``||xbar1 - xbar2||^2`` (``NORM``)."""
    x1, x2 = _check_pair(x1, x2, 4)
    alpha = check_alpha(alpha)
    variant = variant.upper()
    params = chi2_params_from_psi_hat(gram_from_data(x1, x2))
    if variant == "TCQ":
        stat = t_cq_statistic(x1, x2)
        p = stats.chi2.sf(stat / params.beta_scale + params.dof, params.dof)
        method = Method.CHI2_TCQ
    elif variant == "NORM":
        diff = x1.mean(axis=0) - x2.mean(axis=0)
        stat = float(diff @ diff)
        p = stats.chi2.sf(stat / params.beta_scale, params.dof)
        method = Method.CHI2_NORM
    else:
        raise ValueError(f"unknown chi-square variant {variant!r}; use 'TCQ' or 'NORM'")
    crit = chi2_critical_value(params, alpha, variant)
    return TestResult(float(stat), float(p), bool(stat > crit), alpha, method)
