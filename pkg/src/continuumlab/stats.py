"""Small statistical toolbox used by the experiments.

Only classical, closed-form procedures live here: the two-sample
Kolmogorov-Smirnov distance with its asymptotic threshold, normal-theory
confidence intervals for means, and a weighted least-squares slope for
log-log moment scaling.  Everything is deterministic in its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

__all__ = [
    "SampleSet",
    "KSResult",
    "MeanCI",
    "SlopeFit",
    "normal_cdf",
    "ks_two_sample",
    "mean_ci",
    "log_moment_slope",
]

_MIN_KS = 100
_MIN_MEAN = 30


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class SampleSet:
    """A named batch of scalar draws plus the parameters that produced it."""

    label: str
    values: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("samples must form a non-empty 1-d array")
        if not np.isfinite(v).all():
            raise ValueError(f"samples '{self.label}' contain non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    threshold: float
    alpha: float
    n: int
    m: int

    @property
    def passed(self) -> bool:
        return self.statistic < self.threshold


def ks_two_sample(a: SampleSet, b: SampleSet, alpha: float) -> KSResult:
    """Two-sample KS test at level alpha (asymptotic threshold).

    The statistic is the sup distance between empirical CDFs; the threshold
    is c(alpha) * sqrt((n + m) / (n m)) with c(alpha) = sqrt(-ln(alpha/2)/2).
    Both samples must have at least 100 points for the asymptotics to be
    trustworthy.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    n, m = a.size, b.size
    if n < _MIN_KS or m < _MIN_KS:
        raise ValueError(
            f"insufficient data: KS needs at least {_MIN_KS} points per sample, "
            f"got {n} and {m}"
        )
    x = np.sort(a.values)
    y = np.sort(b.values)
    # empirical CDFs of both samples evaluated over the pooled points
    pooled = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, pooled, side="right") / n
    cdf_y = np.searchsorted(y, pooled, side="right") / m
    stat = float(np.abs(cdf_x - cdf_y).max())
    c = math.sqrt(-math.log(alpha / 2.0) / 2.0)
    threshold = c * math.sqrt((n + m) / (n * m))
    return KSResult(stat, threshold, alpha, n, m)


@dataclass(frozen=True)
class MeanCI:
    mean: float
    half_width: float
    level: float
    n: int

    @property
    def lo(self) -> float:
        return self.mean - self.half_width

    @property
    def hi(self) -> float:
        return self.mean + self.half_width

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def mean_ci(sample: SampleSet, level: float = 0.99) -> MeanCI:
    """Normal-approximation confidence interval for the mean."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    n = sample.size
    if n < _MIN_MEAN:
        raise ValueError(f"mean CI needs at least {_MIN_MEAN} points, got {n}")
    v = sample.values
    mean = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(n))
    z = kernels.norm_ppf(0.5 + level / 2.0)
    return MeanCI(mean, z * se, level, n)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    slope_se: float
    intercept: float
    level: float

    def ci(self) -> tuple:
        z = kernels.norm_ppf(0.5 + self.level / 2.0)
        return (self.slope - z * self.slope_se, self.slope + z * self.slope_se)

    def contains(self, x: float) -> bool:
        lo, hi = self.ci()
        return lo <= x <= hi


def log_moment_slope(samples_by_t: dict, level: float = 0.99,
                     min_samples: int = 1000) -> SlopeFit:
    """OLS slope of the empirical mean of log(values) against log t.

    samples_by_t maps each positive abscissa t (at least 3, distinct) to a
    SampleSet of positive draws with at least min_samples points.  The
    regression is ordinary least squares on the per-t means of the logs;
    the slope's standard error propagates each mean's standard error
    through the OLS weights, since with so few abscissae a residual-based
    error estimate would be meaningless.
    """
    if len(samples_by_t) < 3:
        raise ValueError("need at least 3 distinct t values")
    ts = np.array(sorted(samples_by_t), dtype=np.float64)
    if np.any(ts <= 0):
        raise ValueError("t values must be positive")
    y = np.empty_like(ts)
    se = np.empty_like(ts)
    for i, t in enumerate(ts):
        s = samples_by_t[t]
        if s.size < min_samples:
            raise ValueError(
                f"t={t} has {s.size} samples, below the minimum {min_samples}"
            )
        if np.any(s.values <= 0):
            raise ValueError(f"t={t} contains non-positive draws, cannot take logs")
        logs = np.log(s.values)
        y[i] = logs.mean()
        se[i] = logs.std(ddof=1) / math.sqrt(s.size)
    x = np.log(ts)
    xbar = x.mean()
    sxx = ((x - xbar) ** 2).sum()
    coeffs = (x - xbar) / sxx  # slope = sum(coeffs * y)
    slope = float((coeffs * y).sum())
    intercept = float(y.mean() - slope * xbar)
    slope_se = float(math.sqrt(((coeffs * se) ** 2).sum()))
    return SlopeFit(slope, slope_se, intercept, level)
