"""Parametric-bootstrap Kolmogorov-Smirnov test for fitted tail laws.

Replicates are simulated from the fitted law with the observed tail size
and cutoff, and the observed KS distance is ranked among the replicate
distances.  Replicates are generated in fixed-size blocks, block ``b``
drawing from ``distributions.stream(seed, b)``; the report therefore
does not depend on how many workers share the blocks.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, Family, open_uniforms, quantile, stream, tail_function
from .errors import ConfigError, DomainError, EmptyInputError
from .tailfit import Method, TailFit, TailSelection

DEFAULT_REPLICATES = 10_000
MIN_REPLICATES = 100
BLOCK_SIZE = 250
SIGNIFICANCE_LEVELS = (0.10, 0.05, 0.01)


class RefitMode(str, enum.Enum):
    FIXED = "fixed"
    REFIT = "refit"


@dataclass(frozen=True, eq=False)
class BootstrapReport:
    observed_ks: float
    n_replicates: int
    p_value: float
    critical_values: dict[float, float]
    refit_mode: RefitMode
    seed: int
    replicate_ks: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "observed_ks": self.observed_ks,
            "n_replicates": self.n_replicates,
            "p_value": self.p_value,
            "critical_values": {f"{k:g}": v for k, v in sorted(self.critical_values.items())},
            "refit_mode": self.refit_mode.value,
            "seed": self.seed,
        }

    def __eq__(self, other):
        if not isinstance(other, BootstrapReport):
            return NotImplemented
        return (
            self.as_dict() == other.as_dict()
            and np.array_equal(self.replicate_ks, other.replicate_ks)
        )

    def replicates_text(self) -> str:
        return "".join(f"{float(v)!r}\n" for v in self.replicate_ks)


def spec_from_fit(fit: TailFit, x_min: float | None = None) -> DistributionSpec:
    x_min = fit.cutoff if x_min is None else x_min
    if fit.family == "pareto":
        return DistributionSpec.pareto(fit.exponent, x_min)
    if fit.family == "exponential":
        return DistributionSpec.exponential(fit.exponent, x_min)
    raise ConfigError(f"no bootstrap for family {fit.family!r}")


def _ks_sorted(x_sorted: np.ndarray, cdf: np.ndarray) -> np.ndarray:
    """Two-sided KS distance for rows of ascending samples and model cdf values."""
    n = x_sorted.shape[-1]
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return np.maximum(np.max(upper - cdf, axis=-1), np.max(cdf - lower, axis=-1))


def ks_statistic(tail: TailSelection, spec: DistributionSpec) -> float:
    """Supremum distance between the empirical cdf of the tail and ``1 - tail_function``."""
    if tail.n_tail == 0:
        raise EmptyInputError("empty tail")
    if not math.isclose(spec.x_min, tail.cutoff, rel_tol=1e-12, abs_tol=0.0):
        raise DomainError(f"law starts at {spec.x_min}, tail cutoff is {tail.cutoff}")
    x = np.sort(tail.values)
    cdf = 1.0 - np.asarray(tail_function(spec, x))
    return float(_ks_sorted(x, cdf))


def _refit_exponents(x: np.ndarray, fit: TailFit, x_min: float) -> np.ndarray:
    """Row-wise re-estimation, mirroring the method of the original fit."""
    n = x.shape[1]
    if fit.family == "exponential":
        return 1.0 / (x.mean(axis=1) - x_min)
    if Method(fit.method) is Method.MLE:
        return n / np.log(x / x_min).sum(axis=1)
    lx = np.log(x)
    y = np.log(np.arange(n, 0, -1) / n)
    dx = lx - lx.mean(axis=1, keepdims=True)
    return -(dx @ (y - y.mean())) / np.einsum("ij,ij->i", dx, dx)


def _block_ks(block: int, size: int, n: int, spec: DistributionSpec, fit: TailFit, seed: int, mode: RefitMode):
    x = quantile(spec, open_uniforms(stream(seed, block), (size, n)))
    x = np.sort(np.atleast_2d(x), axis=1)
    if mode is RefitMode.FIXED:
        cdf = 1.0 - tail_function(spec, x)
    else:
        exponents = _refit_exponents(x, fit, spec.x_min)[:, None]
        if spec.family is Family.PARETO:
            cdf = 1.0 - (x / spec.x_min) ** (-exponents)
        else:
            cdf = -np.expm1(-exponents * (x - spec.x_min))
    return _ks_sorted(x, cdf)


def bootstrap_test(
    tail: TailSelection,
    fit: TailFit,
    n_replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    refit_mode: RefitMode | str = RefitMode.FIXED,
    workers: int = 1,
) -> BootstrapReport:
    """Bootstrap p-value of the KS distance between ``tail`` and ``fit``.

    In fixed mode replicates are compared with the fitted law itself; in
    refit mode the exponent is re-estimated on every replicate first.
    The p-value counts replicates with a distance at least as large as
    the observed one.
    """
    mode = RefitMode(refit_mode)
    if n_replicates < MIN_REPLICATES:
        raise ConfigError(f"need at least {MIN_REPLICATES} replicates, got {n_replicates}")
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    spec = spec_from_fit(fit, tail.cutoff)
    observed = ks_statistic(tail, spec)
    n = tail.n_tail

    blocks = [
        (b, min(BLOCK_SIZE, n_replicates - b * BLOCK_SIZE))
        for b in range(math.ceil(n_replicates / BLOCK_SIZE))
    ]
    run = lambda job: _block_ks(job[0], job[1], n, spec, fit, seed, mode)  # noqa: E731
    if workers == 1:
        parts = [run(job) for job in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    replicate_ks = np.concatenate(parts)
    replicate_ks.setflags(write=False)

    exceed = int(np.count_nonzero(replicate_ks >= observed))
    critical = {
        level: float(np.percentile(replicate_ks, 100 * (1 - level)))
        for level in SIGNIFICANCE_LEVELS
    }
    return BootstrapReport(
        observed_ks=observed,
        n_replicates=n_replicates,
        p_value=exceed / n_replicates,
        critical_values=critical,
        refit_mode=mode,
        seed=seed,
        replicate_ks=replicate_ks,
    )
