"""Result containers shared by all test procedures."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Method(str, enum.Enum):
    NEW = "NEW"
    CQ = "CQ"
    EB = "EB"
    WB = "WB"
    CHI2_TCQ = "CHI2_TCQ"
    CHI2_NORM = "CHI2_NORM"

    def __str__(self) -> str:
        return self.value

    @property
    def resampling(self) -> bool:
        return self in (Method.NEW, Method.EB, Method.WB)


class DegenerateDataError(ValueError):
    """The data do not determine a usable null distribution (e.g. zero spread)."""


@dataclass(frozen=True)
class TestResult:
    """Outcome of one two-sample test.

    ``b_resamples`` is 0 and ``seed`` is None for the deterministic methods.
    """

    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    reject: bool
    alpha: float
    method: Method
    b_resamples: int = 0
    seed: int | None = None
    stream: int | None = None

    def summary(self) -> str:
        return (
            f"method={self.method} statistic={self.statistic:.10g} "
            f"p={self.p_value:.6g} reject={str(self.reject).lower()}"
        )


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def check_resamples(b: int) -> int:
    if int(b) != b or b < 1:
        raise ValueError(f"number of resamples must be a positive integer, got {b}")
    return int(b)


def resampling_p_value(draws, observed: float) -> float:
    """``(1 + #{draw >= observed}) / (B + 1)``; ties count against rejection."""
    draws = np.asarray(draws, dtype=np.float64)
    return (1.0 + np.count_nonzero(draws >= observed)) / (draws.size + 1.0)
