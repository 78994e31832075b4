"""Combinatorial walk-model tests: forced small cases by exact enumeration of
the rule tree, hitting-law statistics, a full invariant sweep over random
walks, and brute-force oracles for thread enumeration and the relation graph.
"""

import itertools
import math

import numpy as np
import pytest

from continuumlab import (
    EnumerationOverflowError,
    FiniteThreadSet,
    TruncationError,
    Walk,
    WalkTower,
    enumerate_threads,
    generate_tower,
    generate_walk,
    r_graph,
)

# depth-4 towers with small level sizes, found by scanning seeds; frozen so
# the brute-force Cartesian product below stays cheap
SMALL_TOWER_SEEDS = [3, 9, 11, 13]
SMALL_TOWER_MAX_STEPS = 4 * 10**5


# ---------------------------------------------------------------------------
# Walk construction and validation
# ---------------------------------------------------------------------------


def test_walk_validation_catches_rule_violations():
    ok = Walk(np.array([1, 1, 2, 2, 3], dtype=np.int64), 3)
    assert ok.domain_size == 5
    assert ok(1) == 1 and ok(5) == 3
    with pytest.raises(ValueError):
        ok(0)
    with pytest.raises(ValueError):
        ok(6)
    # must start at 1
    with pytest.raises(ValueError):
        Walk(np.array([2, 2, 3], dtype=np.int64), 3)
    # must duplicate at even positions
    with pytest.raises(ValueError):
        Walk(np.array([1, 2, 2, 2, 3], dtype=np.int64), 3)
    # steps bounded by 1
    with pytest.raises(ValueError):
        Walk(np.array([1, 1, 3], dtype=np.int64), 3)
    # must stop at the first hit of k
    with pytest.raises(ValueError):
        Walk(np.array([1, 1, 2, 2, 3, 3, 2], dtype=np.int64), 3)
    # must be surjective (never hits 2 here)
    with pytest.raises(ValueError):
        Walk(np.array([1, 1, 2], dtype=np.int64), 4)
    # values outside [1, k]
    with pytest.raises(ValueError):
        Walk(np.array([1, 1, 0], dtype=np.int64), 2)


def test_generate_walk_k2_forced():
    # every step of the size-2 walk is forced: duplicate, then reflect up
    for seed in (0, 1, 42, 2**62):
        w = generate_walk(2, seed, max_steps=100)
        assert list(w.values) == [1, 1, 2]
        assert w.domain_size == 3


def test_generate_walk_parameter_validation():
    with pytest.raises(ValueError):
        generate_walk(1, 0, 100)
    with pytest.raises(ValueError):
        generate_walk(3, 0, 2)


def test_generate_walk_truncation():
    # hitting 50 from 1 requires at least 99 positions
    with pytest.raises(TruncationError) as exc:
        generate_walk(50, 7, max_steps=60)
    assert exc.value.k == 50
    assert exc.value.max_steps == 60


def test_k3_walks_prefix_and_hitting_law():
    # the size-3 walk always begins (1,1,2,2,.) and stops at position 4j+1
    n = 8000
    ms = np.empty(n, dtype=np.int64)
    for seed in range(n):
        w = generate_walk(3, seed, max_steps=10**5)
        v = list(w.values[:4])
        assert v == [1, 1, 2, 2]
        ms[seed] = w.domain_size
    assert np.all((ms - 1) % 4 == 0)
    # P(m = 4j+1) = 2^-j: each cycle returns to 2 and flips one fair coin
    for j in (1, 2, 3):
        p = 2.0 ** -j
        frac = float((ms == 4 * j + 1).mean())
        assert abs(frac - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_walk_invariant_sweep_random_sizes():
    # Walk.__post_init__ revalidates every rule; none of 10^4 draws may fail
    rng = np.random.default_rng(20260814)
    for _ in range(10_000):
        k = int(rng.integers(2, 12))
        seed = int(rng.integers(0, 2**63))
        w = generate_walk(k, seed, max_steps=10**6)
        assert w.values[-1] == k
        assert w.domain_size % 2 == 1  # k hits at an odd position
        assert w.values[0] == 1


def test_mean_hitting_position():
    # E[m] = 2 (k-1)^2 + 1; for k = 5 that is 33
    n = 4000
    ms = np.array([generate_walk(5, s, 10**6).domain_size for s in range(n)],
                  dtype=np.float64)
    se = ms.std(ddof=1) / math.sqrt(n)
    assert abs(ms.mean() - 33.0) < 3 * se


# ---------------------------------------------------------------------------
# towers
# ---------------------------------------------------------------------------


def test_tower_depth1_forced():
    for seed in range(50):
        t = generate_tower(seed, 1, max_steps=100)
        assert t.sizes == [2, 3]
        assert t.depth == 1


def test_tower_k2_law():
    n = 6000
    k2 = np.array([generate_tower(s, 2, 10**5).sizes[2] for s in range(n)])
    assert np.all((k2 - 1) % 4 == 0)
    frac5 = float((k2 == 5).mean())
    assert abs(frac5 - 0.5) < 3 * math.sqrt(0.25 / n)


def test_tower_structure_invariants():
    for seed in SMALL_TOWER_SEEDS:
        t = generate_tower(seed, 4, SMALL_TOWER_MAX_STEPS)
        assert t.sizes[0] == 2
        assert t.truncated_at is None
        for nlevel, w in enumerate(t.walks):
            assert w.codomain_size == t.sizes[nlevel]
            assert w.domain_size == t.sizes[nlevel + 1]
            assert t.sizes[nlevel + 1] % 2 == 1
        d = t.to_json_dict()
        assert d["seed"] == seed
        assert d["k"] == t.sizes
        assert len(d["walks"]) == 4


def test_tower_validation():
    w = generate_walk(2, 0, 100)
    with pytest.raises(ValueError):
        WalkTower([3, 3], [w], 0, 1)  # k_0 must be 2
    with pytest.raises(ValueError):
        WalkTower([2], [w], 0, 1)  # sizes/walks length mismatch
    with pytest.raises(ValueError):
        generate_tower(0, 0, 100)


def test_tower_truncation_strict_and_partial():
    # a tower forced past size 40 cannot fit its next walk in 60 positions
    with pytest.raises(TruncationError) as exc:
        generate_tower(3, 8, max_steps=400)
    assert exc.value.level is not None
    partial = generate_tower(3, 8, max_steps=400, strict=False)
    assert partial.truncated_at == exc.value.level
    assert partial.depth == exc.value.level
    assert partial.requested_depth == 8


# ---------------------------------------------------------------------------
# thread enumeration
# ---------------------------------------------------------------------------


def test_enumerate_depth1_unconstrained():
    t = generate_tower(0, 2, 10**5)
    ts = enumerate_threads(t, 1, cap=100)
    assert ts.count == 3
    assert ts.threads.tolist() == [[1], [2], [3]]


def test_enumerate_validation():
    t = generate_tower(0, 2, 10**5)
    with pytest.raises(ValueError):
        enumerate_threads(t, 0, cap=10)
    with pytest.raises(ValueError):
        enumerate_threads(t, 3, cap=10)
    with pytest.raises(ValueError):
        enumerate_threads(t, 1, cap=0)


def test_enumerate_overflow():
    t = generate_tower(0, 2, 10**5)
    with pytest.raises(EnumerationOverflowError) as exc:
        enumerate_threads(t, 2, cap=4)
    assert exc.value.cap == 4
    assert exc.value.m == 2


def _brute_force_threads(tower, m):
    ranges = [range(1, tower.sizes[i] + 1) for i in range(1, m + 1)]
    out = []
    for combo in itertools.product(*ranges):
        if all(tower.walks[i](combo[i]) == combo[i - 1] for i in range(1, m)):
            out.append(list(combo))
    return sorted(out)


@pytest.mark.parametrize("seed", SMALL_TOWER_SEEDS)
def test_enumeration_matches_brute_force_cartesian_filter(seed):
    tower = generate_tower(seed, 4, SMALL_TOWER_MAX_STEPS)
    for m in (1, 2, 3, 4):
        mine = enumerate_threads(tower, m, cap=10**6)
        brute = _brute_force_threads(tower, m)
        assert sorted(mine.threads.tolist()) == brute
        # bonding holds exactly on every enumerated thread
        for row in mine.threads:
            for i in range(1, m):
                assert tower.walks[i](int(row[i])) == int(row[i - 1])
        # one thread per top coordinate
        assert mine.count == tower.sizes[m]
        assert list(mine.threads[:, -1]) == list(range(1, tower.sizes[m] + 1))


# ---------------------------------------------------------------------------
# relation graph
# ---------------------------------------------------------------------------


def _brute_force_graph(rows):
    n = len(rows)
    adj = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if max(abs(a - b) for a, b in zip(rows[i], rows[j])) <= 1:
                adj[i][j] = adj[j][i] = True
    # connected components by BFS
    seen = [False] * n
    comps = 0
    for start in range(n):
        if seen[start]:
            continue
        comps += 1
        stack = [start]
        seen[start] = True
        while stack:
            v = stack.pop()
            for w in range(n):
                if adj[v][w] and not seen[w]:
                    seen[w] = True
                    stack.append(w)
    # pairwise-distinct chains x R y R z, counted once per middle element
    triples = 0
    participants = set()
    for y in range(n):
        nbrs = [x for x in range(n) if adj[y][x]]
        for a in range(len(nbrs)):
            for b in range(a + 1, len(nbrs)):
                triples += 1
                participants.update((nbrs[a], y, nbrs[b]))
    # max clique (sizes up to 3 suffice: tops span at most 2 in any triple)
    max_clique = 1
    if any(any(row) for row in adj):
        max_clique = 2
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if adj[i][j] and adj[j][k] and adj[i][k]:
                    max_clique = 3
    return comps, triples, len(participants) / n, max_clique


def test_depth1_graph_is_path():
    t = generate_tower(1, 2, 10**5)
    ts = enumerate_threads(t, 1, cap=100)
    stats = r_graph(ts)
    assert stats.thread_count == 3
    assert stats.components == 1
    assert stats.max_clique_size == 2
    assert stats.triple_count == 1  # the middle coordinate 2
    assert stats.participating_fraction == 1.0
    assert ts.r_edges.tolist() == [[0, 1], [1, 2]]


def test_single_thread_graph():
    ts = FiniteThreadSet(2, np.array([[1, 1]], dtype=np.int64))
    stats = r_graph(ts)
    assert stats.thread_count == 1
    assert stats.components == 1
    assert stats.max_clique_size == 1
    assert stats.triple_count == 0


@pytest.mark.parametrize("seed", SMALL_TOWER_SEEDS)
def test_r_graph_matches_brute_force(seed):
    tower = generate_tower(seed, 4, SMALL_TOWER_MAX_STEPS)
    for m in (2, 3):
        ts = enumerate_threads(tower, m, cap=10**6)
        stats = r_graph(ts)
        comps, triples, part, clique = _brute_force_graph(ts.threads.tolist())
        assert stats.components == comps
        assert stats.triple_count == triples
        assert stats.participating_fraction == pytest.approx(part, abs=1e-12)
        assert stats.max_clique_size == clique


def test_r_graph_connected_and_two_bounded_on_sample():
    # finite-depth analogues: one component, no R-triangles
    for seed in range(25):
        tower = generate_tower(seed, 3, 10**6)
        for m in (1, 2, 3):
            stats = r_graph(enumerate_threads(tower, m, cap=10**6))
            assert stats.components == 1
            assert stats.max_clique_size <= 2
            assert stats.triple_count <= max(stats.thread_count - 2, 0)


def test_participation_fraction_trend():
    # fraction of threads sitting inside some R-triple shrinks with depth
    # on average (finite shadow of the two-element equivalence-class bound)
    fracs = {2: [], 3: []}
    for seed in range(40):
        tower = generate_tower(1000 + seed, 3, 10**6)
        for m in (2, 3):
            stats = r_graph(enumerate_threads(tower, m, cap=10**6))
            fracs[m].append(stats.participating_fraction)
    assert np.mean(fracs[3]) <= np.mean(fracs[2])
