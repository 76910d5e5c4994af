"""Reference laws for tail analysis: exponential, Pareto and q-exponential.

Every law is described by its tail function ``P(X >= x)`` on ``[x_min, inf)``.
Sampling is inverse-transform only, driven by a counter-based generator
keyed on the caller's seed, so any stream can be regenerated from
``(seed, stream key)`` alone.

The q-exponential density is

    f(x) = (2 - q) / scale * (1 + (q - 1) (x - x_min) / scale) ** (-1 / (q - 1))

for ``1 < q < 2``.  Its tail decays like ``x ** -alpha`` with
``alpha = (2 - q) / (q - 1)``, and it tends to an exponential with rate
``1 / scale`` as ``q -> 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .ingest import Sample, SampleKind

_SEED_MASK = (1 << 64) - 1


class Family(str, enum.Enum):
    EXPONENTIAL = "exponential"
    PARETO = "pareto"
    Q_EXPONENTIAL = "q_exponential"


_PARAMETERS = {
    Family.EXPONENTIAL: {"rate_beta"},
    Family.PARETO: {"exponent_alpha"},
    Family.Q_EXPONENTIAL: {"entropic_q", "scale"},
}


@dataclass(frozen=True)
class DistributionSpec:
    family: Family
    x_min: float = 0.0
    rate_beta: float | None = None
    exponent_alpha: float | None = None
    entropic_q: float | None = None
    scale: float | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        present = {
            name
            for name in ("rate_beta", "exponent_alpha", "entropic_q", "scale")
            if getattr(self, name) is not None
        }
        if present != _PARAMETERS[family]:
            raise ValueError(
                f"{family.value} takes exactly {sorted(_PARAMETERS[family])}, got {sorted(present)}"
            )
        for name in present:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")
        if not (math.isfinite(self.x_min) and self.x_min >= 0):
            raise ValueError("x_min must be finite and non-negative")
        if family is Family.PARETO and self.x_min <= 0:
            raise ValueError("a Pareto law needs x_min > 0")
        if family is Family.Q_EXPONENTIAL and not 1 < self.entropic_q < 2:
            raise ValueError("entropic_q must lie in (1, 2) for a normalizable q-exponential")

    @classmethod
    def exponential(cls, beta: float, x_min: float = 0.0) -> "DistributionSpec":
        return cls(Family.EXPONENTIAL, x_min=x_min, rate_beta=beta)

    @classmethod
    def pareto(cls, alpha: float, x_min: float = 1.0) -> "DistributionSpec":
        return cls(Family.PARETO, x_min=x_min, exponent_alpha=alpha)

    @classmethod
    def q_exponential(cls, q: float, scale: float, x_min: float = 0.0) -> "DistributionSpec":
        return cls(Family.Q_EXPONENTIAL, x_min=x_min, entropic_q=q, scale=scale)

    @property
    def tail_exponent(self) -> float | None:
        """Power-law exponent of the tail function, ``None`` for light tails."""
        if self.family is Family.PARETO:
            return self.exponent_alpha
        if self.family is Family.Q_EXPONENTIAL:
            return (2 - self.entropic_q) / (self.entropic_q - 1)
        return None

    def as_dict(self) -> dict:
        out = {"family": self.family.value, "x_min": self.x_min}
        for name in sorted(_PARAMETERS[self.family]):
            out[name] = getattr(self, name)
        return out


def _check_domain(spec: DistributionSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < spec.x_min) or np.any(np.isnan(x)):
        raise DomainError(f"x must be >= x_min = {spec.x_min}")
    return x


def _scalar_or_array(values: np.ndarray):
    return float(values) if values.ndim == 0 else values


def tail_function(spec: DistributionSpec, x):
    """``P(X >= x)``; equals 1 at ``x_min`` and never increases."""
    x = _check_domain(spec, x)
    if spec.family is Family.EXPONENTIAL:
        out = np.exp(-spec.rate_beta * (x - spec.x_min))
    elif spec.family is Family.PARETO:
        out = (x / spec.x_min) ** (-spec.exponent_alpha)
    else:
        q, s = spec.entropic_q, spec.scale
        out = np.exp(-(2 - q) / (q - 1) * np.log1p((q - 1) * (x - spec.x_min) / s))
    return _scalar_or_array(out)


def density(spec: DistributionSpec, x):
    """Density, i.e. minus the derivative of the tail function."""
    x = _check_domain(spec, x)
    if spec.family is Family.EXPONENTIAL:
        beta = spec.rate_beta
        out = beta * np.exp(-beta * (x - spec.x_min))
    elif spec.family is Family.PARETO:
        alpha = spec.exponent_alpha
        out = alpha / spec.x_min * (x / spec.x_min) ** (-alpha - 1)
    else:
        q, s = spec.entropic_q, spec.scale
        out = (2 - q) / s * np.exp(-1 / (q - 1) * np.log1p((q - 1) * (x - spec.x_min) / s))
    return _scalar_or_array(out)


def quantile(spec: DistributionSpec, u):
    """Inverse of the tail function: the ``x`` with ``P(X >= x) = u``."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u > 1)):
        raise DomainError("tail probability must lie in (0, 1]")
    if spec.family is Family.EXPONENTIAL:
        out = spec.x_min - np.log(u) / spec.rate_beta
    elif spec.family is Family.PARETO:
        out = spec.x_min * u ** (-1.0 / spec.exponent_alpha)
    else:
        q, s = spec.entropic_q, spec.scale
        out = spec.x_min + s / (q - 1) * np.expm1(-(q - 1) / (2 - q) * np.log(u))
    return _scalar_or_array(out)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the stream ``key`` under ``seed``.

    Distinct keys give statistically independent streams, and a stream
    depends on nothing but ``(seed, key)``.
    """
    entropy = [int(seed) & _SEED_MASK, *(int(k) for k in key)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def open_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    """Uniform draws on the open interval (0, 1), 53-bit resolution."""
    return (rng.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) / float(1 << 53)


def draw(spec: DistributionSpec, size, rng: np.random.Generator) -> np.ndarray:
    return quantile(spec, open_uniforms(rng, size))


def sample(spec: DistributionSpec, n: int, seed: int) -> Sample:
    if n < 1:
        raise ValueError("n must be at least 1")
    values = np.atleast_1d(draw(spec, n, stream(seed)))
    return Sample(values, kind=SampleKind.SYNTHETIC, unit="")
