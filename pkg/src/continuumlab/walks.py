"""Combinatorial tower of reflected unit-step walks and its finite threads.

Each level is a finite walk f: [m] -> [k] built from fair coin flips: start
at 1, repeat every value once (positions 2x-1 and 2x agree), move +/-1 at
odd positions with forced reflection at the boundaries, stop at the first
hit of k.  The hitting position m becomes the codomain size of the next
level, so a tower is a sequence of surjective unit-step bonding maps
f_n: [k_{n+1}] -> [k_n] with k_0 = 2.

Depth-m threads are the sequences (x_1, ..., x_m) with f_n(x_{n+1}) = x_n.
Two threads are related when their coordinates differ by at most 1 at every
level; the component count of that relation's graph on the full finite
thread set is the computable stand-in used here for connectedness of the
quotient (an artifact-level definition, exact only in the limit).

Expected codomain sizes grow doubly exponentially (a walk into [k] takes
about 2(k-1)^2 steps), so deep levels hit the step budget; truncation is a
counted, reported outcome, never a silent retry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels, seeding

__all__ = [
    "TruncationError",
    "EnumerationOverflowError",
    "Walk",
    "WalkTower",
    "FiniteThreadSet",
    "RGraphStats",
    "generate_walk",
    "generate_tower",
    "enumerate_threads",
    "r_graph",
]


class TruncationError(RuntimeError):
    """A walk exhausted max_steps before hitting its codomain size."""

    def __init__(self, k: int, max_steps: int, level: int | None = None):
        self.k = k
        self.max_steps = max_steps
        self.level = level
        where = "" if level is None else f" at tower level {level}"
        super().__init__(
            f"walk into [{k}] did not stop within {max_steps} steps{where}"
        )


class EnumerationOverflowError(RuntimeError):
    """A thread enumeration would exceed its cap; lower the depth."""

    def __init__(self, count: int, cap: int, m: int):
        self.count = count
        self.cap = cap
        self.m = m
        super().__init__(
            f"depth-{m} thread count {count} exceeds cap {cap}; use a smaller depth"
        )


@dataclass(frozen=True)
class Walk:
    """Stopped reflected walk f(1..m) onto [k]; validates all shape rules."""

    values: np.ndarray  # int64, 1-based values f(1), ..., f(m)
    codomain_size: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        object.__setattr__(self, "values", v)
        k, m = self.codomain_size, v.size
        if k < 2:
            raise ValueError(f"codomain size must be >= 2, got {k}")
        if m < 3:
            raise ValueError(f"walk length must be >= 3, got {m}")
        if v[0] != 1:
            raise ValueError("walk must start at 1")
        if v[-1] != k or np.any(v[:-1] >= k):
            raise ValueError("walk must stop at its first hit of the top value")
        if v.min() < 1:
            raise ValueError("walk values must lie in [1, k]")
        if np.abs(np.diff(v)).max() > 1:
            raise ValueError("walk steps must have size at most 1")
        if np.any(v[1:m:2] != v[0:m - 1:2]):
            raise ValueError("positions 2x and 2x-1 must carry equal values")
        if np.unique(v).size != k:
            raise ValueError("walk must be surjective onto [1, k]")

    @property
    def domain_size(self) -> int:
        return int(self.values.size)

    def __call__(self, x: int) -> int:
        if not 1 <= x <= self.domain_size:
            raise ValueError(f"position {x} outside [1, {self.domain_size}]")
        return int(self.values[x - 1])


def generate_walk(k: int, walk_seed: int, max_steps: int) -> Walk:
    """Run one walk onto [k]; raises TruncationError past max_steps."""
    if k < 2:
        raise ValueError(f"codomain size must be >= 2, got {k}")
    if max_steps < 3:
        raise ValueError(f"max_steps must be >= 3, got {max_steps}")
    values = kernels.walk_values(walk_seed, k, max_steps)
    if values is None:
        raise TruncationError(k, max_steps)
    return Walk(values, k)


@dataclass
class WalkTower:
    """Sizes k_0, k_1, ... and the walks f_n: [k_{n+1}] -> [k_n] between them."""

    sizes: list
    walks: list
    seed: int
    requested_depth: int
    truncated_at: int | None = None  # 0-based index of the walk that failed

    def __post_init__(self):
        if self.sizes[0] != 2:
            raise ValueError("towers start at size 2")
        if len(self.sizes) != len(self.walks) + 1:
            raise ValueError("need one more size than walks")
        for n, w in enumerate(self.walks):
            if w.codomain_size != self.sizes[n] or w.domain_size != self.sizes[n + 1]:
                raise ValueError(f"walk {n} does not bond sizes {n} and {n + 1}")
            if self.sizes[n + 1] % 2 == 0:
                raise ValueError("every generated size past k_0 must be odd")

    @property
    def depth(self) -> int:
        """Deepest m for which [k_m] exists."""
        return len(self.sizes) - 1

    def to_json_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "k": [int(s) for s in self.sizes],
            "walks": [w.values.tolist() for w in self.walks],
        }


def generate_tower(seed: int, depth: int, max_steps: int,
                   strict: bool = True) -> WalkTower:
    """Grow a tower to `depth` walks, one derived seed per level.

    With strict=False a step-budget failure returns the partial tower with
    truncated_at set instead of raising.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    sizes = [2]
    walks = []
    truncated_at = None
    for n in range(depth):
        level_seed = seeding.derive(seed, seeding.WALK_LEVEL, n)
        try:
            w = generate_walk(sizes[-1], level_seed, max_steps)
        except TruncationError as exc:
            if strict:
                raise TruncationError(exc.k, exc.max_steps, level=n) from None
            truncated_at = n
            break
        walks.append(w)
        sizes.append(w.domain_size)
    return WalkTower(sizes, walks, seed, depth, truncated_at)


@dataclass
class FiniteThreadSet:
    """All depth-m threads of a tower, rows ordered by top coordinate."""

    depth: int
    threads: np.ndarray  # shape (count, depth), columns x_1 .. x_m
    r_edges: np.ndarray | None = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return int(self.threads.shape[0])


def enumerate_threads(tower: WalkTower, m: int, cap: int) -> FiniteThreadSet:
    """All (x_1, ..., x_m) with f_n(x_{n+1}) = x_n, by preimage expansion.

    Level 1 lists the unconstrained coordinates [k_1]; each later level
    extends every partial thread by the preimage members of its last
    coordinate.  Since each x in [k_{n+1}] extends exactly the partial
    thread ending at f_n(x), the expansion is carried out per child, which
    also leaves the rows sorted by top coordinate.
    """
    if not 1 <= m <= tower.depth:
        raise ValueError(f"depth {m} outside 1 .. {tower.depth}")
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    count = tower.sizes[1]
    if count > cap:
        raise EnumerationOverflowError(count, cap, m)
    rows = np.arange(1, count + 1, dtype=np.int64).reshape(count, 1)
    for n in range(1, m):
        f = tower.walks[n].values  # f_n: [k_{n+1}] -> [k_n]
        count = tower.sizes[n + 1]
        if count > cap:
            raise EnumerationOverflowError(count, cap, m)
        child = np.arange(1, count + 1, dtype=np.int64)
        rows = np.hstack([rows[f - 1], child.reshape(count, 1)])
    return FiniteThreadSet(m, rows)


@dataclass(frozen=True)
class RGraphStats:
    """Relation-graph diagnostics over one finite thread set."""

    thread_count: int
    components: int
    max_clique_size: int
    triple_count: int
    participating_fraction: float


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def r_graph(threads: FiniteThreadSet) -> RGraphStats:
    """Adjacency (all coordinates within 1), components, cliques, triples.

    Distinct threads have distinct top coordinates, so only rows with
    adjacent tops can be related; each candidate pair is then verified on
    every coordinate.  The triple count covers pairwise-distinct x R y R z,
    whose top coordinates necessarily read y - 1, y, y + 1.
    """
    t = threads.threads
    n = threads.count
    if n == 0:
        raise ValueError("thread set is empty")
    if n == 1:
        object.__setattr__(threads, "r_edges", np.empty((0, 2), dtype=np.int64))
        return RGraphStats(1, 1, 1, 0, 0.0)
    adj = np.abs(t[1:] - t[:-1]).max(axis=1) <= 1  # candidate pairs: tops differ by 1
    edges = np.flatnonzero(adj)
    threads.r_edges = np.column_stack([edges, edges + 1]).astype(np.int64)

    uf = _UnionFind(n)
    for j in edges:
        uf.union(int(j), int(j) + 1)
    components = len({uf.find(i) for i in range(n)})

    max_clique = 2 if edges.size else 1
    triple = adj[1:] & adj[:-1]  # both edges around a middle thread
    participating = np.zeros(n, dtype=bool)
    for j in np.flatnonzero(triple):
        # a triangle would additionally need the outer pair related
        if np.abs(t[j] - t[j + 2]).max() <= 1:
            max_clique = 3
        participating[j:j + 3] = True
    return RGraphStats(
        thread_count=n,
        components=components,
        max_clique_size=max_clique,
        triple_count=int(triple.sum()),
        participating_fraction=float(participating.sum() / n),
    )
