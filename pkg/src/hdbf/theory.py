"""Population-level quantities for known covariances.

``Psi = Sigma1_bar / n1 + Sigma2_bar / n2`` drives everything: the exact
variance of ``T_CQ``, the Gaussian quadratic-form reference law ``G_n`` and the
local power of the randomization test.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .covariance import Covariance
from .randomization import quantile_min
from .rng import TAG_MIXTURE, TAG_REFERENCE, as_seed, blocks, parallel_map

DEFAULT_N_MC = 200_000
_SAMPLE_BLOCK = 65_536


@dataclass(frozen=True)
class PsiSpec:
    """Group sizes and average covariances; ``per_obs*`` optionally lists each observation's covariance."""

    n1: int
    n2: int
    sigma1: Covariance
    sigma2: Covariance
    per_obs1: Sequence[Covariance] | None = field(default=None, repr=False)
    per_obs2: Sequence[Covariance] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError(f"group sizes must be at least 2, got ({self.n1}, {self.n2})")
        if self.sigma1.p != self.sigma2.p:
            raise ValueError("sigma1 and sigma2 differ in dimension")
        for k, n, sbar, per in ((1, self.n1, self.sigma1, self.per_obs1), (2, self.n2, self.sigma2, self.per_obs2)):
            if per is None:
                continue
            if len(per) != n:
                raise ValueError(f"group {k}: {len(per)} per-observation covariances for {n} observations")
            avg = _average(per)
            diff = avg + sbar.scaled(-1.0)
            if diff.trace_sq() > 1e-12 * max(1.0, sbar.trace_sq()):
                raise ValueError(f"group {k}: per-observation covariances do not average to sigma{k}")

    @property
    def p(self) -> int:
        return self.sigma1.p


def _counted(per):
    """Distinct covariance objects with how often each occurs."""
    counts = Counter(id(c) for c in per)
    objs = {id(c): c for c in per}
    return [(objs[i], k) for i, k in counts.items()]


def _average(per) -> Covariance:
    n = len(per)
    items = _counted(per)
    total = items[0][0].scaled(items[0][1] / n)
    for cov, k in items[1:]:
        total = total + cov.scaled(k / n)
    return total


def psi_matrix(spec: PsiSpec) -> Covariance:
    """``Psi_n``; use ``.to_dense()``, ``.trace()``, ``.trace_sq()``, ``.eigenvalues()``."""
    return spec.sigma1.scaled(1.0 / spec.n1) + spec.sigma2.scaled(1.0 / spec.n2)


def psi_eigenvalues(spec: PsiSpec):
    return psi_matrix(spec).eigenvalues()


def sigma_oracle_sq(spec: PsiSpec) -> float:
    total = 0.0
    for n, sbar, per in ((spec.n1, spec.sigma1, spec.per_obs1), (spec.n2, spec.sigma2, spec.per_obs2)):
        tr_bar_sq = sbar.trace_sq()
        if per is None:
            tr_each = n * tr_bar_sq
        else:
            tr_each = sum(k * cov.trace_sq() for cov, k in _counted(per))
        total += 2.0 / (n - 1.0) ** 2 * (tr_bar_sq - tr_each / n**2)
    total += 4.0 / (spec.n1 * spec.n2) * spec.sigma1.trace_product(spec.sigma2)
    return total


def sigma_oracle(spec: PsiSpec) -> float:
    """Exact null standard deviation of ``T_CQ`` for independent zero-mean observations."""
    var = sigma_oracle_sq(spec)
    if var < 0.0:
        raise ValueError(f"computed variance {var} is negative; the covariance specification is invalid")
    return math.sqrt(var)


def _eig_groups(psi_eigs):
    """Accept plain eigenvalues or a ``(values, multiplicities)`` pair."""
    if isinstance(psi_eigs, tuple) and len(psi_eigs) == 2:
        vals = np.asarray(psi_eigs[0], dtype=np.float64)
        counts = np.asarray(psi_eigs[1], dtype=np.int64)
    else:
        vals, counts = np.unique(np.asarray(psi_eigs, dtype=np.float64), return_counts=True)
    if vals.shape != counts.shape or vals.ndim != 1:
        raise ValueError("eigenvalues and multiplicities must be matching 1-D arrays")
    if np.any(counts < 0):
        raise ValueError("multiplicities must be nonnegative")
    scale = float(np.abs(vals).max()) if vals.size else 0.0
    if np.any(vals < -1e-12 * scale):
        raise ValueError("eigenvalues must be nonnegative")
    vals = np.clip(vals, 0.0, None)
    keep = (vals > 0) & (counts > 0)
    vals, counts = vals[keep], counts[keep]
    if vals.size == 0:
        raise ValueError("all eigenvalues are zero; the reference law is undefined")
    return vals, counts


def _centered_chi2_sum(rng, weights, counts, size):
    """``sum_i weights[i] * (chi2(counts[i]) - counts[i])`` for ``size`` draws."""
    out = np.zeros(size)
    for w, k in zip(weights, counts):
        if k == 1:
            out += w * (rng.standard_normal(size) ** 2 - 1.0)
        else:
            out += w * (rng.chisquare(float(k), size) - k)
    return out


def _blocked(count, seed, tag, draw, workers):
    if int(count) != count or count < 1:
        raise ValueError(f"sample count must be a positive integer, got {count}")
    seed = as_seed(seed)

    def run(block):
        idx, start, stop = block
        return draw(seed.generator(tag, idx), stop - start)

    return np.concatenate(parallel_map(run, blocks(int(count), _SAMPLE_BLOCK), workers))


def reference_qf_sample(psi_eigs, count: int, seed=None, workers=None) -> np.ndarray:
    """Draws of ``(xi' Psi xi - tr Psi) / sqrt(2 tr Psi^2)`` for standard normal ``xi``."""
    vals, counts = _eig_groups(psi_eigs)
    scale = math.sqrt(2.0 * float(np.sum(counts * vals**2)))
    return _blocked(count, seed, TAG_REFERENCE, lambda rng, k: _centered_chi2_sum(rng, vals / scale, counts, k), workers)


def mixture_limit_sample(kappas, count: int, seed=None, workers=None) -> np.ndarray:
    """Draws of ``sqrt(1 - sum k^2) xi_0 + 2^{-1/2} sum k_i (xi_i^2 - 1)``."""
    k = np.asarray(kappas, dtype=np.float64).ravel()
    if np.any(k < 0):
        raise ValueError("mixture weights must be nonnegative")
    ksq = float(np.sum(k**2))
    if ksq > 1.0 + 1e-12:
        raise ValueError(f"sum of squared mixture weights is {ksq} > 1")
    normal_sd = math.sqrt(max(0.0, 1.0 - ksq))
    vals, counts = np.unique(k[k > 0], return_counts=True)

    def draw(rng, size):
        out = normal_sd * rng.standard_normal(size)
        return out + _centered_chi2_sum(rng, vals / math.sqrt(2.0), counts, size)

    return _blocked(count, seed, TAG_MIXTURE, draw, workers)


class ReferenceDistribution:
    """Empirical ``G_n`` from one shared Monte-Carlo sample.

    CDF and quantile come from the same sorted draws, so
    ``1 - cdf(quantile(1 - a))`` equals ``a`` up to ``1 / n_mc``.
    """

    def __init__(self, psi_eigs, n_mc: int = DEFAULT_N_MC, seed=None, workers=None):
        if n_mc < 1:
            raise ValueError("n_mc must be positive")
        vals, counts = _eig_groups(psi_eigs)
        self.trace_sq = float(np.sum(counts * vals**2))
        self.draws = np.sort(reference_qf_sample((vals, counts), n_mc, seed, workers))

    def cdf(self, x):
        out = np.searchsorted(self.draws, x, side="right") / self.draws.size
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, q: float) -> float:
        return quantile_min(self.draws, q)


def gn_cdf(psi_eigs, x, n_mc: int = DEFAULT_N_MC, seed=None):
    """Monte-Carlo estimate of ``G_n(x)``; ``x`` may be an array."""
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    return ReferenceDistribution(psi_eigs, n_mc, seed).cdf(x)


def local_power_predict(psi_eigs, alpha: float, shift_norm_sq: float, n_mc: int = DEFAULT_N_MC, seed=None) -> float:
    """Asymptotic power ``1 - G_n[G_n^{-1}(1 - alpha) - ||mu1 - mu2||^2 / sqrt(2 tr Psi^2)]``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if shift_norm_sq < 0:
        raise ValueError("squared shift norm must be nonnegative")
    dist = ReferenceDistribution(psi_eigs, n_mc, seed)
    crit = dist.quantile(1.0 - alpha)
    return 1.0 - dist.cdf(crit - shift_norm_sq / math.sqrt(2.0 * dist.trace_sq))
