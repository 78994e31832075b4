"""Finite towers of composed paths and their limit-interval estimates.

A tower holds paths B_1 .. B_N (independent Brownian motions derived from a
master seed, or deterministic test paths).  Composed images are evaluated
innermost first:

    compose_image(k, d, J) = image of J under B_k after B_{k+1} after ... B_d,

which is exact for set images of continuous functions since each image is an
interval.  The limit-interval estimate for level k tracks compose_image(k, d,
probe) as the starting depth d grows; with suitable probes the sequences
stabilize and lose their probe dependence, and the deepest interval is the
estimate.  Because all sampling is counter-keyed, compose_image satisfies the
semigroup identity exactly: composing to an intermediate level and feeding
the result back in reproduces the direct computation bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import seeding
from .intervals import Interval, cauchy_converged, dist, is_suitable, witness
from .paths import DeterministicPath, LazyBrownianPath, QueryMode, make_brownian

__all__ = ["Thread", "LimitEstimate", "CompositionTower"]


@dataclass(frozen=True)
class Thread:
    """Coordinates (x_1, ..., x_m) with x_i the value of B_i at x_{i+1}."""

    coords: tuple

    @property
    def depth(self) -> int:
        return len(self.coords)


@dataclass
class LimitEstimate:
    """Deepest composed interval for one level, with convergence diagnostics."""

    k: int
    interval: Interval
    probe_dists: list  # pairwise dist matrix across probes at final depth
    converged: bool
    depth_used: int
    resolution_limited: bool = False

    @property
    def cross_probe_dist(self) -> float:
        return max(max(row) for row in self.probe_dists)

    @property
    def witness(self) -> float:
        return witness(self.interval)


class CompositionTower:
    """Paths B_1 .. B_N with composed-image and limit-estimate queries."""

    def __init__(self, paths, mode: QueryMode, master_seed: int = 0):
        if not paths:
            raise ValueError("tower needs at least one path")
        self.paths = list(paths)
        self.mode = mode
        self.master_seed = int(master_seed)
        self._table = None  # [probe][d][k] -> Interval, filled by estimates
        self._probes = None
        self._estimates = None

    # -- construction -------------------------------------------------------

    @classmethod
    def brownian(cls, master_seed: int, depth: int, mode: QueryMode,
                 base_step: float = 1.0) -> "CompositionTower":
        """Tower of independent Brownian paths seeded from master_seed."""
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        paths = [
            make_brownian(seeding.derive(master_seed, seeding.PATH, i),
                          base_step=base_step, default_step=mode.step)
            for i in range(1, depth + 1)
        ]
        return cls(paths, mode, master_seed=master_seed)

    @classmethod
    def deterministic(cls, family: str, depth: int, mode: QueryMode,
                      param: float | None = None) -> "CompositionTower":
        """Tower of closed-form paths; sin_pi_n defaults to n = level index."""
        paths = []
        for i in range(1, depth + 1):
            if family == "sin_pi_n" and param is None:
                paths.append(DeterministicPath(family, i))
            elif family == "identity":
                paths.append(DeterministicPath(family))
            else:
                paths.append(DeterministicPath(family, param))
        return cls(paths, mode)

    @property
    def depth(self) -> int:
        return len(self.paths)

    @property
    def step(self) -> float:
        return self.mode.step

    # -- composed images ------------------------------------------------------

    def compose_image(self, k_from: int, k_to: int, j: Interval) -> Interval:
        """Image of j under B_k_from after ... after B_k_to, innermost first."""
        if not 1 <= k_from <= k_to <= self.depth:
            raise ValueError(f"need 1 <= k_from <= k_to <= {self.depth}")
        cur = j
        for i in range(k_to, k_from - 1, -1):
            cur = self.paths[i - 1].image(cur, self.mode)
        return cur

    def _chain(self, j: Interval, d: int, mode: QueryMode | None = None) -> list:
        """[compose_image(k, d, j) for k = d .. 1], one image call per level."""
        mode = self.mode if mode is None else mode
        out = []
        cur = j
        for i in range(d, 0, -1):
            cur = self.paths[i - 1].image(cur, mode)
            out.append(cur)
        return out

    # -- limit estimates ------------------------------------------------------

    def estimate_limit_intervals(self, probes, tol: float, window: int) -> list:
        """Limit-interval estimates for every level k = 1 .. N.

        For each probe J and depth d the chain gives compose_image(k, d, J)
        for all k <= d.  Level k is declared converged when the intervals
        from the last `window` depths of every probe are pairwise within
        tol; running out of depth first leaves converged False.  The
        estimate itself is the deepest interval of the first probe.

        Each probe's queries run under their own bridge subseed (the mode's
        subseed plus the probe index), so probe agreement is measured on
        independent extremum draws rather than degenerating to reused ones.
        The first probe keeps the mode's subseed and therefore matches
        direct compose_image calls exactly.
        """
        probes = [p if isinstance(p, Interval) else Interval(*p) for p in probes]
        if len(probes) < 2:
            raise ValueError("need at least two probe intervals")
        for p in probes:
            if not is_suitable(p):
                raise ValueError(f"probe {p} is not suitable (nondegenerate, contains 0)")
        N = self.depth
        # table[p][d][k] with d, k one-based; chain returns k = d .. 1
        table = []
        for pi, p in enumerate(probes):
            mode_p = QueryMode(self.mode.kind, self.mode.step,
                               self.mode.subseed + pi)
            by_depth = [None] * (N + 1)
            for d in range(1, N + 1):
                chain = self._chain(p, d, mode_p)
                row = [None] * (d + 1)
                for k in range(d, 0, -1):
                    row[k] = chain[d - k]
                by_depth[d] = row
            table.append(by_depth)

        min_len = 4.0 * self.step
        estimates = []
        for k in range(1, N + 1):
            final = [table[pi][N][k] for pi in range(len(probes))]
            dmat = [[dist(a, b) for b in final] for a in final]
            navail = N - k + 1
            if navail < window:
                converged = False
            else:
                tail = []
                for pi in range(len(probes)):
                    tail.extend(table[pi][d][k] for d in range(N - window + 1, N + 1))
                converged = cauchy_converged(tail, tol, len(tail))
            limited = any(table[0][N][i].length < min_len for i in range(k, N + 1))
            estimates.append(
                LimitEstimate(
                    k=k,
                    interval=final[0],
                    probe_dists=dmat,
                    converged=converged,
                    depth_used=N,
                    resolution_limited=limited,
                )
            )
        self._table = table
        self._probes = probes
        self._estimates = estimates
        return estimates

    def _need_estimates(self):
        if self._estimates is None:
            raise RuntimeError("estimate_limit_intervals has not been run on this tower")
        return self._estimates

    def cross_probe_dist_at(self, k: int, d: int) -> float:
        """Max pairwise probe distance of compose_image(k, d, .) from the cache."""
        if self._table is None:
            raise RuntimeError("estimate_limit_intervals has not been run on this tower")
        if not 1 <= k <= d <= self.depth:
            raise ValueError("need 1 <= k <= d <= depth")
        vals = [self._table[pi][d][k] for pi in range(len(self._probes))]
        return max(dist(a, b) for a in vals for b in vals)

    def witness_sequence(self, K: int) -> list:
        """Witness statistics of the cached estimates for k = 1 .. K."""
        est = self._need_estimates()
        if not 1 <= K <= len(est):
            raise ValueError(f"K must be in 1 .. {len(est)}")
        return [e.witness for e in est[:K]]

    # -- threads ---------------------------------------------------------------

    def sample_thread(self, x_final: float, m: int) -> Thread:
        """Thread (x_1 .. x_m) grown from x_m = x_final by x_i = B_i(x_{i+1})."""
        est = self._need_estimates()
        if not 1 <= m <= self.depth:
            raise ValueError(f"m must be in 1 .. {self.depth}")
        if not est[m - 1].interval.contains(x_final):
            raise ValueError(
                f"x_final {x_final} outside the level-{m} estimate {est[m - 1].interval}"
            )
        coords = [0.0] * m
        coords[m - 1] = float(x_final)
        for i in range(m - 1, 0, -1):
            coords[i - 1] = self.paths[i - 1].value_at(coords[i], self.mode.step)
        return Thread(tuple(coords))

    def thread_unit_coords(self, thread: Thread, slack: float = 1e-9) -> list:
        """Affine unit coordinates (x_k - lo) / length within each estimate.

        Values are clipped to [0, 1]; coordinates farther outside than
        `slack` (in unit scale) raise, as does a degenerate estimate.
        """
        est = self._need_estimates()
        if thread.depth > len(est):
            raise ValueError("thread deeper than available estimates")
        out = []
        for k, x in enumerate(thread.coords, start=1):
            iv = est[k - 1].interval
            if iv.degenerate:
                raise ValueError(f"level-{k} estimate is degenerate, no unit coordinate")
            u = (x - iv.lo) / iv.length
            if u < -slack or u > 1.0 + slack:
                raise ValueError(
                    f"coordinate {x} lies outside the level-{k} estimate {iv} "
                    f"beyond slack {slack}"
                )
            out.append(min(1.0, max(0.0, u)))
        return out

    # -- oscillation -------------------------------------------------------------

    def oscillation_sample(self, k: int, t: float) -> float:
        """Length of the composed image of [0, t] through levels 1 .. k."""
        if not t > 0.0:
            raise ValueError(f"t must be positive, got {t}")
        return self.compose_image(1, k, Interval(0.0, t)).length
