"""Closed bounded intervals and the endpoint metric.

The metric dist(I, J) = max(|min I - min J|, |max I - max J|) coincides with
the Hausdorff distance for nonempty compact intervals, so Cauchy detection in
this metric is Cauchy detection for set convergence.  Intervals are plain
pairs of doubles with exact comparisons; no epsilon enters except tolerances
passed explicitly by callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Interval",
    "dist",
    "scale",
    "witness",
    "is_suitable",
    "cauchy_converged",
]


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with finite endpoints, lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self):
        lo = float(self.lo)
        hi = float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if not lo <= hi:
            raise ValueError(f"interval needs lo <= hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def as_pair(self) -> list:
        """JSON-friendly form: a two-element [lo, hi] list."""
        return [self.lo, self.hi]

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def dist(a: Interval, b: Interval) -> float:
    """Endpoint metric, equal to the Hausdorff distance between a and b."""
    return max(abs(a.lo - b.lo), abs(a.hi - b.hi))


def scale(c: float, i: Interval) -> Interval:
    """Interval with the same midpoint and length scaled by c > 0."""
    if not c > 0.0:
        raise ValueError(f"scale factor must be positive, got {c}")
    m = i.midpoint
    h = 0.5 * c * i.length
    return Interval(m - h, m + h)


def witness(i: Interval) -> float:
    """min(hi, -lo): positive exactly when 0 lies in the interior of i."""
    return min(i.hi, -i.lo)


def is_suitable(i: Interval) -> bool:
    """Nondegenerate and containing the origin."""
    return i.lo < i.hi and i.lo <= 0.0 <= i.hi


def cauchy_converged(seq, tol: float, window: int) -> bool:
    """Whether the last `window` intervals are pairwise strictly within tol.

    Raises if the sequence is shorter than the window: the caller cannot
    tell stabilization from lack of data.
    """
    if window < 2:
        raise ValueError(f"window must be at least 2, got {window}")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    seq = list(seq)
    if window > len(seq):
        raise ValueError(
            f"insufficient data: window {window} exceeds sequence length {len(seq)}"
        )
    tail = seq[-window:]
    for i in range(len(tail)):
        for j in range(i + 1, len(tail)):
            if dist(tail[i], tail[j]) >= tol:
                return False
    return True
