"""Monte-Carlo harness: empirical size and power, ROC curves, QQ pairs, and
size on bootstrap-resampled real data.

Replication ``r`` draws everything from ``RngSeed(seed, r)``, so reports do not
depend on the number of worker threads.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import competitors
from .core_stats import _check_pair, t_cq_statistic
from .models import ModelSpec, calibrate_shift, gamma_kappas, generate, psi_spec
from .randomization import randomization_test
from .results import DegenerateDataError, Method
from .rng import TAG_RESAMPLE, RngSeed, as_seed, parallel_map
from .theory import mixture_limit_sample, psi_eigenvalues, reference_qf_sample, sigma_oracle

CSV_VERSION_LINE = "# hdbf v1"
REPORT_COLUMNS = (
    "method", "model", "n1", "n2", "p", "beta", "R", "B", "alpha",
    "rejections", "size_or_power", "se", "errors",
)  # fmt: skip

DESK_REPS = 2000
DESK_B = 300


def run_method(method, x1, x2, b: int, alpha: float, seed):
    """Run one procedure; resampling methods use ``b`` draws and ``seed``."""
    method = Method(method)
    if method is Method.NEW:
        return randomization_test(x1, x2, b, alpha, seed, workers=1)
    if method is Method.CQ:
        return competitors.cq_test(x1, x2, alpha)
    if method is Method.EB:
        return competitors.empirical_bootstrap_test(x1, x2, b, alpha, seed, workers=1)
    if method is Method.WB:
        return competitors.wild_bootstrap_test(x1, x2, b, alpha, seed, workers=1)
    if method is Method.CHI2_TCQ:
        return competitors.chi2_test(x1, x2, alpha, "TCQ")
    return competitors.chi2_test(x1, x2, alpha, "NORM")


def _methods(methods) -> list[Method]:
    if isinstance(methods, (str, Method)):
        methods = [methods]
    out = [Method(m.upper() if isinstance(m, str) else m) for m in methods]
    if not out:
        raise ValueError("at least one method is required")
    return out


@dataclass
class ExperimentReport:
    """Rejection tallies of several methods over ``reps`` replications.

    Rates are taken over replications where the method ran; ``errors`` counts
    the replications where it raised :class:`DegenerateDataError`.
    """

    label: str
    n1: int
    n2: int
    p: int
    beta: float
    reps: int
    b: int
    alpha: float
    seed: int
    methods: list
    rejections: dict
    errors: dict
    wall_clock: float = 0.0
    p_values: np.ndarray | None = field(default=None, repr=False)

    def rate(self, method) -> float:
        method = Method(method)
        done = self.reps - self.errors[method]
        return self.rejections[method] / done if done else math.nan

    def se(self, method) -> float:
        method = Method(method)
        done = self.reps - self.errors[method]
        if not done:
            return math.nan
        r = self.rate(method)
        return math.sqrt(r * (1.0 - r) / done)

    def rows(self) -> list[dict]:
        return [
            {
                "method": str(m),
                "model": self.label,
                "n1": self.n1,
                "n2": self.n2,
                "p": self.p,
                "beta": f"{self.beta:g}",
                "R": self.reps,
                "B": self.b,
                "alpha": f"{self.alpha:g}",
                "rejections": self.rejections[m],
                "size_or_power": f"{self.rate(m):.6f}",
                "se": f"{self.se(m):.6f}",
                "errors": self.errors[m],
            }
            for m in self.methods
        ]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(CSV_VERSION_LINE + "\n")
            writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(self.rows())

    def summary(self) -> str:
        return " ".join(f"{m}={self.rate(m):.4f}(se={self.se(m):.4f})" for m in self.methods)


def _tally(label, n1, n2, p, beta, reps, b, alpha, seed, methods, outcomes, started):
    """Fold per-replication ``[(p_value, reject) or None, ...]`` lists into a report."""
    pv = np.full((reps, len(methods)), np.nan)
    rejections = {m: 0 for m in methods}
    errors = {m: 0 for m in methods}
    for r, row in enumerate(outcomes):
        for j, (m, res) in enumerate(zip(methods, row)):
            if res is None:
                errors[m] += 1
                continue
            pv[r, j] = res[0]
            rejections[m] += int(res[1])
    return ExperimentReport(
        label, n1, n2, p, float(beta), reps, b, alpha, seed, methods, rejections, errors,
        time.perf_counter() - started, pv,
    )  # fmt: skip


def _run_all(methods, x1, x2, b, alpha, seed):
    row = []
    for m in methods:
        try:
            res = run_method(m, x1, x2, b, alpha, seed)
        except DegenerateDataError:
            row.append(None)
        else:
            row.append((res.p_value, res.reject))
    return row


def _check_reps(reps: int) -> int:
    if int(reps) != reps or reps < 1:
        raise ValueError(f"replication count must be a positive integer, got {reps}")
    return int(reps)


def _model_experiment(model: ModelSpec, beta, methods, reps, b, alpha, seed, workers):
    started = time.perf_counter()
    methods = _methods(methods)
    reps = _check_reps(reps)
    base = as_seed(seed)

    def one(r):
        rs = RngSeed(base.seed, r)
        x1, x2 = generate(model, rs)
        return _run_all(methods, x1, x2, b, alpha, rs)

    outcomes = parallel_map(one, range(reps), workers)
    return _tally(model.label, model.n1, model.n2, model.p, beta, reps, b, alpha, base.seed, methods, outcomes, started)


def run_size_experiment(
    model: ModelSpec, methods, reps: int = DESK_REPS, b: int = DESK_B, alpha: float = 0.05, seed=None, workers=None
) -> ExperimentReport:
    """Empirical rejection rates under the null ``mu1 = mu2``."""
    if not model.is_null:
        raise ValueError("size experiments need a model without a mean shift")
    return _model_experiment(model, 0.0, methods, reps, b, alpha, seed, workers)


def run_power_experiment(
    model: ModelSpec,
    beta: float,
    methods,
    reps: int = DESK_REPS,
    b: int = DESK_B,
    alpha: float = 0.05,
    seed=None,
    workers=None,
) -> ExperimentReport:
    """Empirical rejection rates with ``mu2 = c 1_p`` calibrated to signal-to-noise ``beta``."""
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    shifted = model.with_shift(calibrate_shift(model, beta)) if beta > 0 else model
    return _model_experiment(shifted, beta, methods, reps, b, alpha, seed, workers)


def roc_curve(
    model: ModelSpec,
    beta: float,
    method,
    reps: int,
    b: int,
    seed,
    grid: Sequence[float],
    workers=None,
) -> list[tuple[float, float]]:
    """Power at each level in ``grid`` from one set of per-replication p-values."""
    grid = [float(a) for a in grid]
    if any(not 0.0 < a < 1.0 for a in grid):
        raise ValueError("ROC levels must lie in (0, 1)")
    report = run_power_experiment(model, beta, [method], reps, b, 0.05, seed, workers)
    pv = report.p_values[:, 0]
    pv = pv[~np.isnan(pv)]
    return [(a, float(np.mean(pv <= a))) for a in grid]


def null_standardized_draws(model: ModelSpec, reps: int, seed=None, workers=None) -> np.ndarray:
    """``T_CQ / sigma`` over ``reps`` null datasets, ``sigma`` the exact null SD."""
    if not model.is_null:
        raise ValueError("QQ draws need a model without a mean shift")
    reps = _check_reps(reps)
    base = as_seed(seed)
    sigma = sigma_oracle(psi_spec(model))

    def one(r):
        return t_cq_statistic(*generate(model, RngSeed(base.seed, r)))

    return np.asarray(parallel_map(one, range(reps), workers)) / sigma


def reference_draws(model: ModelSpec, n_ref: int, seed=None, mode: str = "qf", kappas=None) -> np.ndarray:
    """Reference-law draws: ``qf`` uses Psi's eigenvalues, ``mixture`` uses ``kappas``.

    For the gamma model ``kappas`` defaults to the limiting weights.
    """
    ref_seed = RngSeed(as_seed(seed).seed, -1)
    if mode == "qf":
        return reference_qf_sample(psi_eigenvalues(psi_spec(model)), n_ref, ref_seed)
    if mode == "mixture":
        if kappas is None:
            if model.model != "gamma":
                raise ValueError("mixture mode needs kappas unless the model is gamma")
            kappas = gamma_kappas(model.gamma, model.p)
        return mixture_limit_sample(kappas, n_ref, ref_seed)
    raise ValueError(f"unknown reference mode {mode!r}; use 'qf' or 'mixture'")


def qq_pairs(model: ModelSpec, reps: int, seed=None, n_ref: int = 100_000, mode: str = "qf", kappas=None, workers=None):
    """``(empirical_quantile, reference_quantile)`` pairs at plotting positions ``(i - 1/2) / reps``."""
    emp = np.sort(null_standardized_draws(model, reps, seed, workers))
    ref = reference_draws(model, n_ref, seed, mode, kappas)
    probs = (np.arange(1, emp.size + 1) - 0.5) / emp.size
    return np.column_stack([emp, np.quantile(ref, probs)])


def write_pairs_csv(path, pairs, columns) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(CSV_VERSION_LINE + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for a, b in pairs:
            writer.writerow([repr(float(a)), repr(float(b))])


def resampled_null_sizes(
    x1, x2, methods, reps: int = DESK_REPS, b: int = DESK_B, alpha: float = 0.05, seed=None, workers=None
) -> ExperimentReport:
    """Sizes on data resampled with replacement from each group's centered rows."""
    started = time.perf_counter()
    x1, x2 = _check_pair(x1, x2, 2)
    methods = _methods(methods)
    reps = _check_reps(reps)
    base = as_seed(seed)
    c1 = x1 - x1.mean(axis=0)
    c2 = x2 - x2.mean(axis=0)
    n1, n2 = c1.shape[0], c2.shape[0]

    def one(r):
        rs = RngSeed(base.seed, r)
        rng = rs.generator(TAG_RESAMPLE)
        y1 = c1[rng.integers(0, n1, n1)]
        y2 = c2[rng.integers(0, n2, n2)]
        return _run_all(methods, y1, y2, b, alpha, rs)

    outcomes = parallel_map(one, range(reps), workers)
    return _tally("resampled", n1, n2, c1.shape[1], 0.0, reps, b, alpha, base.seed, methods, outcomes, started)
