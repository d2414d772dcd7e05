"""Data-generating models for the size, power and QQ experiments.

Model I is standard normal, II adds a rank-2 spike, III has skewed entries with
heteroscedastic diagonal scales, and IV is a banded moving average of skewed
latents. ``gamma`` is the equicorrelated normal model
``gamma * 11' + (1 - gamma) * I`` whose limiting law moves from normal
(gamma = 0) to a centered chi-square(1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .covariance import Covariance
from .rng import TAG_DATA, as_seed
from .theory import PsiSpec, psi_matrix

MODELS = ("I", "II", "III", "IV", "gamma")
_IV_BASE = 1.01
_IV_WINDOW = 6


@dataclass(frozen=True)
class ModelSpec:
    model: str
    n1: int
    n2: int
    p: int
    gamma: float | None = None
    shift: np.ndarray | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.n1 < 2 or self.n2 < 2 or self.p < 1:
            raise ValueError(f"invalid sizes n1={self.n1}, n2={self.n2}, p={self.p}")
        if self.model == "II" and self.p % 4:
            raise ValueError(f"model II needs p divisible by 4, got {self.p}")
        if self.model == "gamma":
            if self.gamma is None or not 0.0 <= self.gamma <= 1.0:
                raise ValueError(f"gamma model needs gamma in [0, 1], got {self.gamma}")
        if self.shift is not None:
            shift = np.asarray(self.shift, dtype=np.float64)
            if shift.shape != (self.p,):
                raise ValueError(f"shift must have length p={self.p}")
            object.__setattr__(self, "shift", shift)

    @classmethod
    def parse(cls, name: str, n1: int, n2: int, p: int) -> "ModelSpec":
        """Build from ``I``, ``II``, ``III``, ``IV`` or ``gamma:G``."""
        name = name.strip()
        if name.lower().startswith("gamma:"):
            return cls("gamma", n1, n2, p, gamma=float(name.split(":", 1)[1]))
        return cls(name.upper(), n1, n2, p)

    @property
    def label(self) -> str:
        return f"gamma:{self.gamma:g}" if self.model == "gamma" else self.model

    @property
    def is_null(self) -> bool:
        return self.shift is None or not np.any(self.shift)

    def with_shift(self, c: float) -> "ModelSpec":
        """Same model with ``mu2 - mu1 = c * 1_p``."""
        return replace(self, shift=np.full(self.p, float(c)))


def _model2_factors(p: int, group: int) -> np.ndarray:
    q = p // 4
    one = np.ones(q)
    if group == 1:
        cols = ([1, 1, 1, 1], [1, -1, 1, -1])
    else:
        cols = ([1, 1, -1, -1], [1, -1, -1, 1])
    return np.column_stack([np.concatenate([s * one for s in signs]) for signs in cols])


def _model3_split(n: int) -> int:
    """Observations with the increasing-variance pattern; the rest get the reversed one."""
    return (n + 1) // 2


def _model4_matrix(p: int) -> np.ndarray:
    a = np.zeros((p, p + _IV_WINDOW - 1))
    for j in range(p):
        idx = np.arange(j, j + _IV_WINDOW)
        a[j, idx] = _IV_BASE**idx
    return a


def group_covariance(spec: ModelSpec, group: int) -> Covariance:
    """Average covariance of group ``group`` (1 or 2)."""
    p = spec.p
    if spec.model == "I":
        return Covariance.identity(p)
    if spec.model == "II":
        return Covariance.low_rank_plus_identity(_model2_factors(p, group), [1.0, 0.5])
    if spec.model == "III":
        n = spec.n1 if group == 1 else spec.n2
        h = _model3_split(n)
        up = np.arange(1, p + 1, dtype=np.float64)
        return Covariance.diagonal(group * (h * up + (n - h) * up[::-1]) / n)
    if spec.model == "IV":
        a = _model4_matrix(p)
        return Covariance.from_dense(a @ a.T)
    return Covariance.low_rank_plus_identity(np.ones(p), [spec.gamma], 1.0 - spec.gamma)


def psi_spec(spec: ModelSpec) -> PsiSpec:
    """Population description of a model, with per-observation covariances for Model III."""
    per1 = per2 = None
    if spec.model == "III":
        up = np.arange(1, spec.p + 1, dtype=np.float64)
        per = []
        for k, n in ((1, spec.n1), (2, spec.n2)):
            inc, dec = Covariance.diagonal(k * up), Covariance.diagonal(k * up[::-1])
            h = _model3_split(n)
            per.append([inc] * h + [dec] * (n - h))
        per1, per2 = per
    return PsiSpec(spec.n1, spec.n2, group_covariance(spec, 1), group_covariance(spec, 2), per1, per2)


def _std_chi2(rng, shape):
    return (rng.standard_normal(shape) ** 2 - 1.0) / math.sqrt(2.0)


def _generate_group(spec: ModelSpec, group: int, n: int, rng) -> np.ndarray:
    p = spec.p
    if spec.model == "III":
        up = np.sqrt(group * np.arange(1, p + 1, dtype=np.float64))
        h = _model3_split(n)
        scale = np.vstack([np.broadcast_to(up, (h, p)), np.broadcast_to(up[::-1], (n - h, p))])
        return scale * _std_chi2(rng, (n, p))
    if spec.model == "IV":
        width = p + _IV_WINDOW - 1
        z = _std_chi2(rng, (n, width)) * _IV_BASE ** np.arange(width)
        y = np.zeros((n, p))
        for shift in range(_IV_WINDOW):
            y += z[:, shift : shift + p]
        return y
    return group_covariance(spec, group).sample(rng, n)


def generate(spec: ModelSpec, seed=None):
    """One dataset ``(x1, x2)``; group 1 has mean zero and group 2 mean ``shift``."""
    rng = as_seed(seed).generator(TAG_DATA)
    x1 = _generate_group(spec, 1, spec.n1, rng)
    x2 = _generate_group(spec, 2, spec.n2, rng)
    if spec.shift is not None:
        x2 = x2 + spec.shift
    return x1, x2


def calibrate_shift(spec: ModelSpec, beta: float) -> float:
    """``c`` such that ``mu2 = c 1_p`` has ``||mu2||^2 / sqrt(2 tr Psi^2) = beta``."""
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    tr_sq = psi_matrix(psi_spec(spec)).trace_sq()
    return math.sqrt(beta * math.sqrt(2.0 * tr_sq) / spec.p)


def signal_to_noise(spec: ModelSpec) -> float:
    """``||mu1 - mu2||^2 / sqrt(2 tr Psi^2)`` of the model's shift."""
    if spec.shift is None:
        return 0.0
    tr_sq = psi_matrix(psi_spec(spec)).trace_sq()
    return float(spec.shift @ spec.shift) / math.sqrt(2.0 * tr_sq)


def gamma_kappas(gamma: float, p: int, limit: bool = True) -> np.ndarray:
    """Mixture weights for the gamma model.

    ``limit=True`` gives the limiting weights: none for gamma = 0, ``1/sqrt(2)``
    for gamma = 1/sqrt(p), and a single weight 1 for any other fixed gamma.
    ``limit=False`` gives the exact finite-p eigenvalue ratios.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if not limit:
        top = p * gamma + 1.0 - gamma
        rest = 1.0 - gamma
        norm = math.sqrt(top**2 + (p - 1) * rest**2)
        return np.concatenate([[top / norm], np.full(p - 1, rest / norm)])
    if gamma == 0.0:
        return np.zeros(0)
    if math.isclose(gamma, 1.0 / math.sqrt(p), rel_tol=1e-9):
        return np.array([1.0 / math.sqrt(2.0)])
    return np.array([1.0])
