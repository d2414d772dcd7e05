"""Covariance matrices stored as ``diag(d) + F diag(w) F'`` or densely.

The structured form keeps trace products and spectra cheap for the identity,
diagonal and low-rank-plus-identity covariances used by the simulation models.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# dense eigendecompositions beyond this size are refused
MAX_DENSE_EIG = 4096


@dataclass(frozen=True, eq=False)
class Covariance:
    p: int
    diag: np.ndarray | None = None
    factors: np.ndarray | None = None
    weights: np.ndarray | None = None
    dense: np.ndarray | None = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def identity(cls, p: int, scale: float = 1.0) -> "Covariance":
        return cls(p, diag=np.full(p, float(scale)), factors=np.zeros((p, 0)), weights=np.zeros(0))

    @classmethod
    def diagonal(cls, d) -> "Covariance":
        d = np.asarray(d, dtype=np.float64)
        return cls(d.size, diag=d.copy(), factors=np.zeros((d.size, 0)), weights=np.zeros(0))

    @classmethod
    def low_rank_plus_identity(cls, factors, weights, scale: float = 1.0) -> "Covariance":
        """``scale * I + F diag(weights) F'``."""
        f = np.atleast_2d(np.asarray(factors, dtype=np.float64))
        if f.shape[0] == 1 and np.ndim(factors) == 1:
            f = f.T
        w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        if f.shape[1] != w.size:
            raise ValueError("factor columns and weights differ in number")
        return cls(f.shape[0], diag=np.full(f.shape[0], float(scale)), factors=f, weights=w)

    @classmethod
    def from_dense(cls, a, atol: float = 1e-10) -> "Covariance":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"covariance must be square, got shape {a.shape}")
        scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
        if not np.allclose(a, a.T, rtol=0.0, atol=atol * scale):
            raise ValueError("covariance matrix is not symmetric")
        return cls(a.shape[0], dense=(a + a.T) / 2.0)

    # -- algebra ------------------------------------------------------------
    @property
    def is_dense(self) -> bool:
        return self.dense is not None

    def to_dense(self) -> np.ndarray:
        if self.is_dense:
            return self.dense
        return np.diag(self.diag) + (self.factors * self.weights) @ self.factors.T

    def scaled(self, c: float) -> "Covariance":
        c = float(c)
        if self.is_dense:
            return Covariance(self.p, dense=c * self.dense)
        return Covariance(self.p, diag=c * self.diag, factors=self.factors, weights=c * self.weights)

    def __add__(self, other: "Covariance") -> "Covariance":
        if self.p != other.p:
            raise ValueError(f"dimension mismatch: {self.p} vs {other.p}")
        if self.is_dense or other.is_dense:
            return Covariance(self.p, dense=self.to_dense() + other.to_dense())
        return Covariance(
            self.p,
            diag=self.diag + other.diag,
            factors=np.hstack([self.factors, other.factors]),
            weights=np.concatenate([self.weights, other.weights]),
        )

    def trace(self) -> float:
        if self.is_dense:
            return float(np.trace(self.dense))
        return float(self.diag.sum() + np.sum(self.weights * np.sum(self.factors**2, axis=0)))

    def trace_product(self, other: "Covariance") -> float:
        """``tr(A B)`` for symmetric ``A`` (self) and ``B``."""
        if self.p != other.p:
            raise ValueError(f"dimension mismatch: {self.p} vs {other.p}")
        if self.is_dense or other.is_dense:
            return float(np.sum(self.to_dense() * other.to_dense()))
        fa, wa, da = self.factors, self.weights, self.diag
        fb, wb, db = other.factors, other.weights, other.diag
        total = float(da @ db)
        total += float(wb @ ((fb**2).T @ da))
        total += float(wa @ ((fa**2).T @ db))
        cross = fa.T @ fb
        total += float(wa @ cross**2 @ wb)
        return total

    def trace_sq(self) -> float:
        return self.trace_product(self)

    # -- spectrum -----------------------------------------------------------
    def eigenvalues(self):
        """Distinct eigenvalues and their multiplicities, both as arrays."""
        if not self.is_dense:
            r = self.weights.size
            if r == 0:
                return _group(self.diag)
            c = self.diag[0]
            if np.all(self.diag == c) and r <= self.p and np.all(self.weights >= 0):
                sw = np.sqrt(self.weights)
                small = (self.factors.T @ self.factors) * np.outer(sw, sw)
                mu = np.linalg.eigvalsh(small)
                # repeated factors make ``small`` singular; snap round-off so c + 0 merges with c
                mu[np.abs(mu) <= 64 * np.finfo(float).eps * max(np.abs(mu).max(), abs(c))] = 0.0
                vals = np.concatenate([c + mu, [c]])
                counts = np.concatenate([np.ones(r, dtype=np.int64), [self.p - r]])
                keep = counts > 0
                return _group(vals[keep], counts[keep])
        if self.p > MAX_DENSE_EIG:
            raise ValueError(f"dense eigendecomposition refused for p={self.p} > {MAX_DENSE_EIG}")
        return _group(np.linalg.eigvalsh(self.to_dense()))

    # -- sampling -----------------------------------------------------------
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` rows drawn from ``N(0, self)``."""
        if self.is_dense:
            vals, vecs = np.linalg.eigh(self.dense)
            root = vecs * np.sqrt(np.clip(vals, 0.0, None))
            return rng.standard_normal((n, self.p)) @ root.T
        if np.any(self.diag < 0) or np.any(self.weights < 0):
            raise ValueError("structured sampling needs nonnegative diagonal and weights")
        out = rng.standard_normal((n, self.p)) * np.sqrt(self.diag)
        if self.weights.size:
            out += (rng.standard_normal((n, self.weights.size)) * np.sqrt(self.weights)) @ self.factors.T
        return out


def _group(values, counts=None):
    values = np.asarray(values, dtype=np.float64)
    if counts is None:
        counts = np.ones(values.size, dtype=np.int64)
    uniq, inv = np.unique(values, return_inverse=True)
    merged = np.zeros(uniq.size, dtype=np.int64)
    np.add.at(merged, inv, counts)
    return uniq[::-1].copy(), merged[::-1].copy()
