"""Lorenz curve, Gini coefficient and top-share statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .ingest import Sample

# guards ceil() against products like 0.1 * 30 = 3.0000000000000004
_COUNT_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class LorenzCurve:
    population_share: np.ndarray
    money_share: np.ndarray
    gini: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.population_share.tolist(), self.money_share.tolist()))

    def to_tsv(self) -> str:
        lines = ["population_share\tmoney_share"]
        lines += [f"{p!r}\t{m!r}" for p, m in self.points]
        return "\n".join(lines) + "\n"


def _sorted_values(sample: Sample) -> np.ndarray:
    return np.sort(sample.values)


def gini(sample: Sample) -> float:
    """``2 sum(i x_(i)) / (n sum x) - (n + 1) / n`` over ascending values."""
    x = _sorted_values(sample)
    n = x.size
    ranks = np.arange(1, n + 1)
    return float(2.0 * (ranks @ x) / (n * x.sum()) - (n + 1) / n)


def lorenz(sample: Sample) -> LorenzCurve:
    """Lorenz curve at all n points plus the origin."""
    x = _sorted_values(sample)
    n = x.size
    share = np.concatenate(([0.0], np.cumsum(x) / x.sum()))
    share[-1] = 1.0
    population = np.arange(n + 1) / n
    return LorenzCurve(population_share=population, money_share=share, gini=gini(sample))


def top_count(n: int, fraction: float) -> int:
    return max(1, math.ceil(fraction * n - _COUNT_EPS))


def top_share(sample: Sample, fraction: float) -> float:
    """Share of the total held by the ``ceil(fraction * n)`` largest values."""
    if not 0 < fraction <= 1:
        raise DomainError("fraction must lie in (0, 1]")
    x = _sorted_values(sample)[::-1]
    k = top_count(x.size, fraction)
    if k == x.size:
        return 1.0
    return float(x[:k].sum() / x.sum())


def pareto_rule_check(sample: Sample, share: float = 0.8) -> float:
    """Smallest population fraction whose top members hold at least ``share`` of the total."""
    x = _sorted_values(sample)[::-1]
    cum = np.cumsum(x)
    k = int(np.searchsorted(cum, share * cum[-1] * (1 - 1e-12), side="left")) + 1
    return min(k, x.size) / x.size
