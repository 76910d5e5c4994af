"""Maximum-entropy distributions over discrete money (or bidder) levels.

Given levels ``m_1 < ... < m_N`` and a target mean, find the probability
vector with the largest Shannon or Tsallis entropy subject to
``sum(p) = 1`` and ``sum(p * m) = target``.  With the Lagrangian

    L = S(p) - lam * (sum(p) - 1) - kappa * (sum(p * m) - target)

stationarity gives

    Shannon:  p_i = exp(-1 - lam - kappa * m_i)
    Tsallis:  p_i = [(1 - q) / q * (lam + kappa * m_i)] ** (1 / (q - 1))

For ``q < 1`` the Tsallis solution is a shifted power law,
``p_i ~ (a + m_i) ** (-1 / (1 - q))``, whose density on a uniform level
grid has tail exponent ``alpha = 1 / (1 - q) - 1``.  For ``q > 1`` it has
compact support and the bracket is clipped at zero (KKT).  ``kappa > 0``
always means probabilities fall with the level.

Both solvers reduce to one-dimensional bisection: for Shannon on
``kappa``, for Tsallis on the shift of the power-law form, whose
normalisation then fixes ``kappa`` and ``lam`` in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import open_uniforms, stream
from .errors import DomainError, InfeasibleError, SolverError
from .ingest import Sample, SampleKind

DEFAULT_LEVELS = 64
_MAX_BISECT = 400


class Entropy(str, enum.Enum):
    SHANNON = "shannon"
    TSALLIS = "tsallis"


@dataclass(frozen=True, eq=False)
class MaxEntProblem:
    levels: np.ndarray
    target_mean: float
    entropy: Entropy = Entropy.SHANNON
    q: float | None = None

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim != 1 or levels.size < 2:
            raise DomainError("need at least two levels")
        if not np.all(np.isfinite(levels)) or np.any(levels <= 0):
            raise DomainError("levels must be finite and positive")
        if np.any(np.diff(levels) <= 0):
            raise DomainError("levels must be strictly increasing")
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        entropy = Entropy(self.entropy)
        object.__setattr__(self, "entropy", entropy)
        if entropy is Entropy.TSALLIS:
            if self.q is None or not (math.isfinite(self.q) and self.q > 0) or self.q == 1:
                raise DomainError("Tsallis entropy needs q > 0, q != 1")
        if not levels[0] < self.target_mean < levels[-1]:
            raise InfeasibleError(
                f"target mean {self.target_mean!r} outside ({levels[0]!r}, {levels[-1]!r})"
            )

    def as_dict(self) -> dict:
        return {
            "levels": self.levels.tolist(),
            "target_mean": self.target_mean,
            "entropy": self.entropy.value,
            "q": self.q,
        }


@dataclass(frozen=True, eq=False)
class MaxEntSolution:
    levels: np.ndarray
    probabilities: np.ndarray
    kappa: float
    lam: float
    achieved_mean: float
    entropy_value: float
    entropy: Entropy
    q: float | None = None
    iterations: int = field(default=0, compare=False)

    def as_dict(self) -> dict:
        return {
            "entropy": self.entropy.value,
            "q": self.q,
            "kappa": self.kappa,
            "lambda": self.lam,
            "achieved_mean": self.achieved_mean,
            "entropy_value": self.entropy_value,
            "levels": self.levels.tolist(),
            "probabilities": self.probabilities.tolist(),
        }

    def to_tsv(self) -> str:
        rows = [f"{m!r}\t{p!r}" for m, p in zip(self.levels.tolist(), self.probabilities.tolist())]
        return "level\tprobability\n" + "\n".join(rows) + "\n"


def level_grid(lo: float, hi: float, num: int = DEFAULT_LEVELS, spacing: str = "log") -> np.ndarray:
    if not 0 < lo < hi or num < 2:
        raise DomainError("need 0 < lo < hi and at least two levels")
    if spacing == "log":
        return np.geomspace(lo, hi, num)
    if spacing == "linear":
        return np.linspace(lo, hi, num)
    raise DomainError(f"unknown spacing {spacing!r}")


def entropy_value(probabilities, entropy: Entropy | str = Entropy.SHANNON, q: float | None = None) -> float:
    """Shannon ``-sum p log p`` (with ``0 log 0 = 0``) or Tsallis ``(1 - sum p^q) / (q - 1)``."""
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise DomainError("probabilities must be a non-negative finite vector")
    total = float(math.fsum(p))
    if abs(total - 1) > 1e-9:
        raise DomainError(f"probabilities sum to {total!r}")
    pos = p[p > 0]
    logs = np.log(pos)
    if Entropy(entropy) is Entropy.SHANNON:
        return float(-(pos @ logs))
    if q is None or q == 1 or not q > 0:
        raise DomainError("Tsallis entropy needs q > 0, q != 1")
    # written with expm1 so that q -> 1 keeps full precision
    return float(((1.0 - total) - pos @ np.expm1((q - 1) * logs)) / (q - 1))


def _bisect(f, lo: float, hi: float) -> tuple[float, int]:
    """Root of an increasing function bracketed by ``f(lo) < 0 < f(hi)``."""
    for i in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid, i
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), _MAX_BISECT


def _uniform_solution(problem: MaxEntProblem) -> MaxEntSolution:
    n = problem.levels.size
    p = np.full(n, 1.0 / n)
    if problem.entropy is Entropy.SHANNON:
        lam = math.log(n) - 1.0
    else:
        q = problem.q
        lam = n ** (1 - q) * q / (1 - q)
    return _finish(problem, p, 0.0, lam, 0)


def _finish(problem: MaxEntProblem, p: np.ndarray, kappa: float, lam: float, iterations: int):
    p = p / math.fsum(p)
    p.setflags(write=False)
    return MaxEntSolution(
        levels=problem.levels,
        probabilities=p,
        kappa=kappa,
        lam=lam,
        achieved_mean=math.fsum(p * problem.levels),
        entropy_value=entropy_value(p, problem.entropy, problem.q),
        entropy=problem.entropy,
        q=problem.q,
        iterations=iterations,
    )


def _oriented(problem: MaxEntProblem):
    """Offsets from the favoured end of the grid, scaled to [0, 1].

    Returns ``(offsets, target, sign, anchor, spread)``; ``sign = +1``
    when the target lies below the uniform mean (mass piles up on the
    lowest level) and ``-1`` when it lies above.
    """
    m = problem.levels
    spread = float(m[-1] - m[0])
    if problem.target_mean < float(np.mean(m)):
        return (m - m[0]) / spread, (problem.target_mean - m[0]) / spread, 1.0, float(m[0]), spread
    return (m[-1] - m) / spread, (m[-1] - problem.target_mean) / spread, -1.0, float(m[-1]), spread


def _is_symmetric(problem: MaxEntProblem) -> bool:
    mean = math.fsum(problem.levels) / problem.levels.size
    return abs(problem.target_mean - mean) <= 4 * np.finfo(float).eps * max(abs(mean), 1.0)


def solve_shannon(problem: MaxEntProblem) -> MaxEntSolution:
    """Boltzmann solution ``p ~ exp(-kappa m)`` of the Shannon problem."""
    if problem.entropy is not Entropy.SHANNON:
        raise DomainError("problem is not a Shannon problem")
    if _is_symmetric(problem):
        return _uniform_solution(problem)
    d, tau, sign, anchor, spread = _oriented(problem)

    def weights(k):
        return np.exp(-k * d)

    def excess(log_k):
        w = weights(math.exp(log_k))
        return tau - float(w @ d) / float(w.sum())

    # mean offset falls from mean(d) to 0 as k grows; bracket log k
    lo, hi = -40.0, 1.0
    while excess(hi) < 0:
        hi += 10.0
        if hi > 700:
            raise SolverError("could not bracket the Shannon multiplier")
    while excess(lo) > 0:
        lo -= 10.0
        if lo < -700:
            raise SolverError("could not bracket the Shannon multiplier")
    log_k, iterations = _bisect(excess, lo, hi)
    k = math.exp(log_k)
    w = weights(k)
    kappa = sign * k / spread
    # exact stationarity: lam = log(sum exp(-kappa (m - anchor))) - kappa anchor - 1
    lam = math.log(float(w.sum())) - kappa * anchor - 1.0
    return _finish(problem, w, kappa, lam, iterations)


def _tsallis_weights(d: np.ndarray, t: float, q: float) -> np.ndarray:
    if q < 1:
        return np.exp(-np.log1p(d / t) / (1 - q))
    base = np.clip(1.0 - d / t, 0.0, None)
    with np.errstate(divide="ignore"):
        return np.where(base > 0, np.exp(np.log(base) / (q - 1)), 0.0)


def solve_tsallis(problem: MaxEntProblem) -> MaxEntSolution:
    """Maximiser of the Tsallis entropy under the ordinary mean constraint.

    The solution is searched as ``p_i ~ (1 + d_i / t) ** (-1 / (1 - q))``
    (``q < 1``) or ``p_i ~ (1 - d_i / t)_+ ** (1 / (q - 1))`` (``q > 1``)
    with ``d_i`` the offset of level i from the favoured end; the mean is
    monotone in the shift ``t``.  ``kappa`` and ``lam`` follow from the
    normalisation.
    """
    if problem.entropy is not Entropy.TSALLIS:
        raise DomainError("problem is not a Tsallis problem")
    if _is_symmetric(problem):
        return _uniform_solution(problem)
    q = problem.q
    d, tau, sign, anchor, spread = _oriented(problem)

    def excess(log_t):
        w = _tsallis_weights(d, math.exp(log_t), q)
        return tau - float(w @ d) / float(w.sum())

    # mean offset rises from 0 (t -> 0) to mean(d) (t -> inf)
    lo, hi = -1.0, 1.0
    while excess(hi) > 0:
        hi += 5.0
        if hi > 700:
            raise SolverError(f"no finite shift reaches target {problem.target_mean!r} (q={q})")
    while excess(lo) < 0:
        lo -= 5.0
        if lo < -700:
            raise SolverError(f"no positive shift reaches target {problem.target_mean!r} (q={q})")
    log_t, iterations = _bisect(lambda s: -excess(s), lo, hi)
    t = math.exp(log_t)
    w = _tsallis_weights(d, t, q)
    total = float(w.sum())
    c = (1 - q) / q
    # p_i = (c (lam + kappa m_i)) ** (1 / (q - 1)) with lam + kappa m_i = +-|kappa| spread (t +- d_i)
    if q < 1:
        magnitude = total ** (1 - q) / (c * spread * t)
        kappa = sign * magnitude
        lam = magnitude * spread * t - kappa * anchor
    else:
        magnitude = total ** (1 - q) / (-c * spread * t)
        kappa = sign * magnitude
        lam = -magnitude * spread * t - kappa * anchor
    if not (math.isfinite(kappa) and math.isfinite(lam)):
        raise SolverError(f"multipliers overflowed (t={t!r}, q={q})")
    return _finish(problem, w, kappa, lam, iterations)


def solve(problem: MaxEntProblem) -> MaxEntSolution:
    if problem.entropy is Entropy.SHANNON:
        return solve_shannon(problem)
    return solve_tsallis(problem)


def generate_synthetic(solution: MaxEntSolution, n: int, seed: int) -> Sample:
    """Draw ``n`` levels with the solved probabilities (inverse transform on the cumulative sum)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    cum = np.cumsum(solution.probabilities)
    cum[-1] = 1.0
    u = open_uniforms(stream(seed), n)
    idx = np.minimum(np.searchsorted(cum, u, side="right"), cum.size - 1)
    return Sample(solution.levels[idx], kind=SampleKind.SYNTHETIC, unit="level")
