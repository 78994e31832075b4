"""Path sources: lazy two-sided Brownian motion and deterministic test paths.

A path source exposes value_at(t) with value_at(0) = 0 and image queries over
intervals.  The Brownian implementation samples a two-sided standard motion
on demand: level-0 anchors at multiples of base_step are cumulative unit
increments outward from the origin (independent streams for each side), and
finer dyadic nodes are conditional midpoints.  Because every draw is keyed by
the node's canonical coordinates (see _kernels_py), refinement never changes
an already-sampled value and disjoint queries commute.

Image queries come in two modes.  grid(step) takes min/max over materialized
grid nodes plus conditional endpoint values, so it shrinks the true image
inward.  bridge_exact(step, subseed) additionally draws, for every cell
between consecutive candidates, the conditional maximum and minimum of the
Brownian bridge across that cell by inverse CDF from

    P(max <= m | ends a, b over span h) = 1 - exp(-2 (m-a)(m-b) / h),

which makes the sampled supremum of the whole interval exact in law given
the grid, since cell extrema are conditionally independent given node values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import kernels
from .intervals import Interval

__all__ = [
    "QueryMode",
    "LazyBrownianPath",
    "DeterministicPath",
    "make_brownian",
    "make_deterministic",
    "level_for_step",
]

DETERMINISTIC_FAMILIES = ("identity", "affine", "sin_pi_n", "zigzag")


@dataclass(frozen=True)
class QueryMode:
    """Extrema query mode: sampling kind, grid step, bridge subseed."""

    kind: str
    step: float
    subseed: int = 0

    def __post_init__(self):
        if self.kind not in ("grid", "bridge_exact"):
            raise ValueError(f"unknown extrema mode {self.kind!r}")
        if not self.step > 0.0:
            raise ValueError(f"mode step must be positive, got {self.step}")

    @classmethod
    def grid(cls, step: float) -> "QueryMode":
        return cls("grid", step)

    @classmethod
    def bridge_exact(cls, step: float, subseed: int = 0) -> "QueryMode":
        return cls("bridge_exact", step, subseed)

    @property
    def is_bridge(self) -> bool:
        return self.kind == "bridge_exact"


def level_for_step(base_step: float, step: float) -> int:
    """Smallest dyadic level whose spacing base_step / 2**level is <= step."""
    if not step > 0.0:
        raise ValueError(f"step must be positive, got {step}")
    level = 0
    # tiny relative slack so step == base_step / 2**k lands on level k exactly
    while base_step / (1 << level) > step * (1.0 + 1e-9):
        level += 1
        if level >= 60:
            raise ValueError(f"step {step} too small relative to base_step {base_step}")
    return level


class LazyBrownianPath:
    """Two-sided standard Brownian motion, sampled lazily on dyadic grids.

    The node store caches materialized (time, value) pairs for inspection
    and dumps; queries do not need it because any node can be regenerated
    bit-identically from the seed.  The horizon doubles whenever a query
    reaches past it.

    value_at at an off-grid time is a conditional draw inside the cell that
    contains it at the query level (explicit step argument, else the path's
    default step).  The draw is keyed by (time, level), so a given time and
    step always reproduce the same value; different steps are different
    finite-resolution approximations and may differ.
    """

    def __init__(self, seed: int, base_step: float = 1.0, default_step: float | None = None):
        if not base_step > 0.0:
            raise ValueError(f"base_step must be positive, got {base_step}")
        self.seed = int(seed)
        self.base_step = float(base_step)
        self.default_step = float(default_step) if default_step is not None else None
        self.horizon = float(base_step)
        self.nodes: dict[float, float] = {}

    # -- internal ---------------------------------------------------------

    def _level(self, step: float | None) -> int:
        if step is None:
            step = self.default_step if self.default_step is not None else self.base_step
        return level_for_step(self.base_step, step)

    def _grow_horizon(self, reach: float):
        while self.horizon < reach:
            self.horizon *= 2.0

    # -- queries ----------------------------------------------------------

    def value_at(self, t: float, step: float | None = None) -> float:
        """Path value at time t, resolved at the given (or default) step."""
        self._grow_horizon(abs(t))
        return kernels.point_value(self.seed, self.base_step, float(t), self._level(step))

    def refine(self, i: Interval, step: float) -> None:
        """Materialize grid nodes of spacing <= step covering i into the store.

        Idempotent: repeated refinement rewrites identical values.
        """
        level = self._level(step)
        delta = self.base_step / (1 << level)
        i_lo = math.floor(i.lo / delta)
        i_hi = math.ceil(i.hi / delta)
        self._grow_horizon(max(abs(i.lo), abs(i.hi)))
        vals = kernels.grid_values(self.seed, self.base_step, level, i_lo, i_hi)
        for j in range(i_hi - i_lo + 1):
            self.nodes[(i_lo + j) * delta] = float(vals[j])

    def extrema(self, i: Interval, mode: QueryMode) -> tuple[float, float]:
        """Sampled (min, max) of the path over i under the given mode."""
        if i.degenerate:
            v = self.value_at(i.lo, mode.step)
            return v, v
        self._grow_horizon(max(abs(i.lo), abs(i.hi)))
        return kernels.interval_extrema(
            self.seed,
            self.base_step,
            i.lo,
            i.hi,
            self._level(mode.step),
            mode.is_bridge,
            mode.subseed,
        )

    def image(self, i: Interval, mode: QueryMode) -> Interval:
        mn, mx = self.extrema(i, mode)
        return Interval(mn, mx)

    def dump_nodes(self, fileobj) -> None:
        """Write materialized nodes as 'time,value' CSV rows sorted by time."""
        fileobj.write("time,value\n")
        for t in sorted(self.nodes):
            fileobj.write(f"{t!r},{self.nodes[t]!r}\n")


class DeterministicPath:
    """Closed-form path for tests and composition sanity checks.

    Families (all fix the origin):
      identity          f(t) = t
      affine(a)         f(t) = a * t
      sin_pi_n(n)       f(t) = sin(pi * n * t)
      zigzag(period)    triangle wave of slope +-1, amplitude period / 4
    """

    def __init__(self, family: str, param: float | None = None):
        if family not in DETERMINISTIC_FAMILIES:
            raise ValueError(f"unknown deterministic path family {family!r}")
        self.family = family
        if family == "identity":
            if param is not None:
                raise ValueError("identity takes no parameter")
            self.param = None
        else:
            if param is None:
                raise ValueError(f"{family} needs a parameter")
            p = float(param)
            if family == "sin_pi_n":
                if not (p > 0 and p == int(p)):
                    raise ValueError(f"sin_pi_n needs a positive integer n, got {param}")
            elif family == "zigzag":
                if not p > 0:
                    raise ValueError(f"zigzag needs a positive period, got {param}")
            self.param = p

    def value_at(self, t: float, step: float | None = None) -> float:
        f, p = self.family, self.param
        if f == "identity":
            return float(t)
        if f == "affine":
            return p * t
        if f == "sin_pi_n":
            return math.sin(math.pi * p * t)
        # triangle wave: rises with slope 1 on [0, p/4], falls to -p/4, repeats
        u = (t / p) % 1.0
        if u <= 0.25:
            return p * u
        if u <= 0.75:
            return p * (0.5 - u)
        return p * (u - 1.0)

    def extrema(self, i: Interval, mode: QueryMode | None = None) -> tuple[float, float]:
        """Exact (min, max) over i from endpoints and interior critical points."""
        f, p = self.family, self.param
        cands = [self.value_at(i.lo), self.value_at(i.hi)]
        if f == "sin_pi_n":
            # critical points at t = (m + 1/2) / n
            m0 = math.ceil(p * i.lo - 0.5)
            m1 = math.floor(p * i.hi - 0.5)
            if m1 - m0 >= 1:
                # consecutive critical values alternate, so both signs occur
                cands.extend([-1.0, 1.0])
            else:
                for m in range(m0, m1 + 1):
                    cands.append(self.value_at((m + 0.5) / p))
        elif f == "zigzag":
            # peaks at p/4 + m*p/2
            m0 = math.ceil((i.lo - 0.25 * p) / (0.5 * p))
            m1 = math.floor((i.hi - 0.25 * p) / (0.5 * p))
            if m1 - m0 >= 1:
                cands.extend([-0.25 * p, 0.25 * p])
            else:
                for m in range(m0, m1 + 1):
                    cands.append(self.value_at(0.25 * p + m * 0.5 * p))
        return min(cands), max(cands)

    def image(self, i: Interval, mode: QueryMode | None = None) -> Interval:
        mn, mx = self.extrema(i, mode)
        return Interval(mn, mx)


def make_brownian(seed: int, base_step: float = 1.0, default_step: float | None = None) -> LazyBrownianPath:
    """Fresh lazily sampled two-sided Brownian motion."""
    return LazyBrownianPath(seed, base_step=base_step, default_step=default_step)


def make_deterministic(formula: str, param: float | None = None) -> DeterministicPath:
    """Deterministic path by family name; unknown names raise ValueError."""
    return DeterministicPath(formula, param)
