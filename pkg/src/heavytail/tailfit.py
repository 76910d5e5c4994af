"""Exponential, power-law and Zipf estimators.

Power-law exponents are estimated two ways above a fixed cutoff: by
least squares on the log-log empirical tail function (the graphical
estimate) and by maximum likelihood (Hill).  The regression estimate is
biased, so reports carry both.

Empirical tail probabilities use no continuity correction: the i-th
smallest of n values gets ``(n - i + 1) / n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DivergentEstimateError,
    DomainError,
    InsufficientTailError,
    RangeError,
    ZeroVarianceError,
)
from .ingest import Sample

MIN_TAIL = 10
DEFAULT_CUTOFF = 1.0
DEFAULT_TOP_K = 100


class Method(str, enum.Enum):
    REGRESSION = "regression"
    MLE = "mle"


@dataclass(frozen=True, eq=False)
class TailSelection:
    cutoff: float
    n_total: int
    values: np.ndarray

    @property
    def n_tail(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class TailFit:
    family: str
    method: Method
    exponent: float
    cutoff: float
    std_error: float
    n_obs: int
    r_squared: float | None = None

    def __post_init__(self):
        if not self.exponent > 0:
            raise DivergentEstimateError(f"non-positive {self.family} exponent {self.exponent!r}")
        if (self.r_squared is None) != (Method(self.method) is Method.MLE):
            raise ValueError("r_squared is reported for regression fits only")

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "method": Method(self.method).value,
            "exponent": self.exponent,
            "cutoff": self.cutoff,
            "std_error": self.std_error,
            "n_obs": self.n_obs,
            "r_squared": self.r_squared,
        }


@dataclass(frozen=True)
class ZipfFit:
    gamma: float
    top_k: int
    intercept: float
    r_squared: float
    std_error: float

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "top_k": self.top_k,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "std_error": self.std_error,
        }


def select_tail(sample: Sample, cutoff: float = DEFAULT_CUTOFF) -> TailSelection:
    """Keep the values at or above ``cutoff``, sorted ascending.

    Meant for standardized samples, where the cutoff is a number of
    standard deviations.  Tail size is checked by the fits, not here.
    """
    if not cutoff >= 0:
        raise DomainError("cutoff must be non-negative")
    values = np.sort(sample.values[sample.values >= cutoff])
    values.setflags(write=False)
    return TailSelection(cutoff=float(cutoff), n_total=len(sample), values=values)


def empirical_tail(sorted_values: np.ndarray) -> np.ndarray:
    n = sorted_values.size
    return np.arange(n, 0, -1) / n


def _require_tail(tail: TailSelection, min_tail: int):
    if tail.n_tail < min_tail:
        raise InsufficientTailError(f"{tail.n_tail} tail values, need at least {min_tail}")
    if not tail.cutoff > 0:
        raise DomainError("a power law needs a positive cutoff")


def _ols(x: np.ndarray, y: np.ndarray):
    """Slope, intercept, R^2 and slope standard error of y on x."""
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    if sxx == 0:
        raise DivergentEstimateError("regressor has no spread")
    slope = float(dx @ dy) / sxx
    intercept = float(ym - slope * xm)
    resid = y - intercept - slope * x
    ss_res, ss_tot = float(resid @ resid), float(dy @ dy)
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    dof = x.size - 2
    se = math.sqrt(ss_res / dof / sxx) if dof > 0 else math.nan
    return slope, intercept, r2, se


def hill_exponent(values, x_min: float) -> float:
    """Continuous Pareto MLE ``n / sum(log(x / x_min))``."""
    values = np.asarray(values, dtype=float)
    log_sum = float(np.sum(np.log(values / x_min)))
    if log_sum <= 0:
        raise DivergentEstimateError("all tail values sit at the cutoff")
    return values.size / log_sum


def fit_power_mle(tail: TailSelection, min_tail: int = MIN_TAIL) -> TailFit:
    _require_tail(tail, min_tail)
    alpha = hill_exponent(tail.values, tail.cutoff)
    return TailFit(
        family="pareto",
        method=Method.MLE,
        exponent=alpha,
        cutoff=tail.cutoff,
        std_error=alpha / math.sqrt(tail.n_tail),
        n_obs=tail.n_tail,
    )


def fit_power_regression(tail: TailSelection, min_tail: int = MIN_TAIL) -> TailFit:
    """Least squares of log tail probability on log value."""
    _require_tail(tail, min_tail)
    x = np.log(tail.values)
    y = np.log(empirical_tail(tail.values))
    slope, _, r2, se = _ols(x, y)
    return TailFit(
        family="pareto",
        method=Method.REGRESSION,
        exponent=-slope,
        cutoff=tail.cutoff,
        std_error=se,
        n_obs=tail.n_tail,
        r_squared=r2,
    )


def exponential_regression(levels, tail_probs, origin: float) -> tuple[float, float, float]:
    """Fit ``log P(X >= b) = -beta (b - origin)`` through the origin.

    Returns ``(beta, r_squared, std_error)``; R^2 is the uncentered one
    appropriate to a regression without intercept.
    """
    x = np.asarray(levels, dtype=float) - origin
    y = np.log(np.asarray(tail_probs, dtype=float))
    sxx = float(x @ x)
    if sxx == 0:
        raise ZeroVarianceError("need at least one level beyond the anchor")
    slope = float(x @ y) / sxx
    resid = y - slope * x
    ss_res, ss_y = float(resid @ resid), float(y @ y)
    r2 = 1.0 if ss_y == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_y))
    dof = np.count_nonzero(x) - 1
    se = math.sqrt(ss_res / dof / sxx) if dof > 0 else math.nan
    return -slope, r2, se


def fit_exponential(sample: Sample, fixed_intercept_at: float | None = None) -> TailFit:
    """Exponential-law fit.

    With ``fixed_intercept_at = b0`` the empirical tail function is
    evaluated at each distinct value ``b >= b0`` and ``log F(b)`` is
    regressed on ``b - b0`` with the line pinned at ``F(b0) = 1``.
    Without it, the shifted-exponential MLE ``1 / (mean - min)`` is used.
    """
    values = np.sort(sample.values)
    if values[0] == values[-1]:
        raise ZeroVarianceError("all values are identical")
    n = values.size
    if fixed_intercept_at is None:
        lo = float(values[0])
        beta = 1.0 / (float(values.mean()) - lo)
        return TailFit(
            family="exponential",
            method=Method.MLE,
            exponent=beta,
            cutoff=lo,
            std_error=beta / math.sqrt(n),
            n_obs=n,
        )

    b0 = float(fixed_intercept_at)
    levels, first = np.unique(values, return_index=True)
    keep = levels >= b0
    tail_probs = (n - first[keep]) / n
    beta, r2, se = exponential_regression(levels[keep], tail_probs, b0)
    return TailFit(
        family="exponential",
        method=Method.REGRESSION,
        exponent=beta,
        cutoff=b0,
        std_error=se,
        n_obs=int(np.count_nonzero(values >= b0)),
        r_squared=r2,
    )


def fit_zipf(sample: Sample, top_k: int = DEFAULT_TOP_K) -> ZipfFit:
    """Rank-size regression ``log value = c - gamma log rank`` over the top ranks."""
    if top_k < 3:
        raise RangeError("top_k must be at least 3")
    if top_k > len(sample):
        raise RangeError(f"top_k = {top_k} exceeds sample length {len(sample)}")
    # stable sort keeps first-appearance order among ties
    ranked = sample.values[np.argsort(-sample.values, kind="stable")][:top_k]
    ranks = np.arange(1, top_k + 1, dtype=float)
    slope, intercept, r2, se = _ols(np.log(ranks), np.log(ranked))
    gamma = -slope
    if not gamma > 0:
        raise DivergentEstimateError(f"rank-size slope {slope!r} is not decreasing")
    return ZipfFit(gamma=gamma, top_k=top_k, intercept=intercept, r_squared=r2, std_error=se)
