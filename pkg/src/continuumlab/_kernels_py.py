"""Pure-Python kernel backend.

Every random quantity produced here is a deterministic function of
(seed, role tag, integer payloads) through a SplitMix64-style mixer.  This
counter-based scheme is what makes path values independent of query order,
materialization history, and worker count: the value at a dyadic node is
keyed by the node's canonical (level, odd index) coordinates, never by how
many draws happened before it.

The compiled backend in _ckernels.pyx implements the same functions with
textually identical arithmetic (same operation order, same libm calls, built
with -ffp-contract=off), so the two backends agree bit for bit.  The parity
tests in tests/test_kernels.py enforce that.

Key domains (tag constants below):

  INC_POS / INC_NEG   unit increments of the right / left half of the
                      two-sided motion, payload = anchor index >= 1
  MID                 dyadic midpoint displacement, payload = (level,
                      odd index at that level), canonical per node
  PT                  off-grid point evaluation inside a cell, payload =
                      (bit pattern of t, grid level)
  BRMAX / BRMIN       bridge maximum / minimum draw for a cell, payload =
                      (bit pattern of the cell's left endpoint, subseed)
  WALK                fair coin stream for reflected walks, payload =
                      draw counter
"""

import math

import numpy as np

MASK64 = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15

TAG_INC_POS = 1
TAG_INC_NEG = 2
TAG_MID = 3
TAG_PT = 4
TAG_BRMAX = 5
TAG_BRMIN = 6
TAG_WALK = 7

# ---------------------------------------------------------------------------
# hashing and distribution transforms
# ---------------------------------------------------------------------------


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a well-mixed 64-bit permutation."""
    z = (z + _GOLD) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def chain_key(seed: int, tag: int, a: int, b: int, c: int = 0) -> int:
    """Hash (seed, tag, a, b, c) into one 64-bit key."""
    h = mix64((seed ^ (tag * _GOLD)) & MASK64)
    h = mix64(h ^ (a & MASK64))
    h = mix64(h ^ (b & MASK64))
    h = mix64(h ^ (c & MASK64))
    return h


def u01(h: int) -> float:
    """Map a 64-bit key to a uniform double in the open interval (0, 1).

    Uses the top 52 bits plus a half-lattice offset: both extremes,
    2^-53 and 1 - 2^-53, are exactly representable, so the result can
    never round to 0.0 or 1.0.
    """
    return ((h >> 12) + 0.5) * 2.220446049250313e-16


# Wichura's PPND16 rational approximations (relative error ~1e-16).
_A0 = 3.3871328727963666080e0
_A1 = 1.3314166789178437745e2
_A2 = 1.9715909503065514427e3
_A3 = 1.3731693765509461125e4
_A4 = 4.5921953931549871457e4
_A5 = 6.7265770927008700853e4
_A6 = 3.3430575583588128105e4
_A7 = 2.5090809287301226727e3
_B1 = 4.2313330701600911252e1
_B2 = 6.8718700749205790830e2
_B3 = 5.3941960214247511077e3
_B4 = 2.1213794301586595867e4
_B5 = 3.9307895800092710610e4
_B6 = 2.8729085735721942674e4
_B7 = 5.2264952788528545610e3
_C0 = 1.42343711074968357734e0
_C1 = 4.63033784615654529590e0
_C2 = 5.76949722146069140550e0
_C3 = 3.64784832476320460504e0
_C4 = 1.27045825245236838258e0
_C5 = 2.41780725177450611770e-1
_C6 = 2.27238449892691845833e-2
_C7 = 7.74545014278341407640e-4
_D1 = 2.05319162663775882187e0
_D2 = 1.67638483018380384940e0
_D3 = 6.89767334985100004550e-1
_D4 = 1.48103976427480074590e-1
_D5 = 1.51986665636164571966e-2
_D6 = 5.47593808499534494600e-4
_D7 = 1.05075007164441684324e-9
_E0 = 6.65790464350110377720e0
_E1 = 5.46378491116411436990e0
_E2 = 1.78482653991729133580e0
_E3 = 2.96560571828504891230e-1
_E4 = 2.65321895265761230930e-2
_E5 = 1.24266094738807843860e-3
_E6 = 2.71155556874348757815e-5
_E7 = 2.01033439929228813265e-7
_F1 = 5.99832206555887937690e-1
_F2 = 1.36929880922735805310e-1
_F3 = 1.48753612908506148525e-2
_F4 = 7.86869131145613259100e-4
_F5 = 1.84631831751005468180e-5
_F6 = 1.42151175831644588870e-7
_F7 = 2.04426310338993978564e-15


def norm_ppf(p: float) -> float:
    """Inverse standard normal CDF (AS 241, double precision)."""
    q = p - 0.5
    if q < 0.425 and q > -0.425:
        r = 0.180625 - q * q
        num = ((((((_A7 * r + _A6) * r + _A5) * r + _A4) * r + _A3) * r + _A2) * r + _A1) * r + _A0
        den = ((((((_B7 * r + _B6) * r + _B5) * r + _B4) * r + _B3) * r + _B2) * r + _B1) * r + 1.0
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = ((((((_C7 * r + _C6) * r + _C5) * r + _C4) * r + _C3) * r + _C2) * r + _C1) * r + _C0
        den = ((((((_D7 * r + _D6) * r + _D5) * r + _D4) * r + _D3) * r + _D2) * r + _D1) * r + 1.0
    else:
        r = r - 5.0
        num = ((((((_E7 * r + _E6) * r + _E5) * r + _E4) * r + _E3) * r + _E2) * r + _E1) * r + _E0
        den = ((((((_F7 * r + _F6) * r + _F5) * r + _F4) * r + _F3) * r + _F2) * r + _F1) * r + 1.0
    val = num / den
    if q < 0.0:
        return -val
    return val


def _normal(seed: int, tag: int, a: int, b: int, c: int = 0) -> float:
    return norm_ppf(u01(chain_key(seed, tag, a, b, c)))


def float_bits(t: float) -> int:
    """IEEE-754 bit pattern of t as an unsigned 64-bit integer.

    Zero is normalized so -0.0 and 0.0 key identically.
    """
    if t == 0.0:
        return 0
    u = np.float64(t).view(np.uint64)
    return int(u)


# ---------------------------------------------------------------------------
# path sampling
# ---------------------------------------------------------------------------


def grid_values(seed: int, base_step: float, level: int, i_lo: int, i_hi: int) -> np.ndarray:
    """Path values at the dyadic grid times j * base_step / 2**level.

    Returns values for j = i_lo .. i_hi inclusive.  Level-0 anchors are
    cumulative unit-scale increments outward from the pinned origin
    (value 0 at time 0); finer levels fill in conditional midpoints with
    displacements keyed by the node's canonical (level, odd index) pair,
    so results do not depend on which spans were materialized before.
    """
    if level < 0 or i_lo > i_hi:
        raise ValueError("bad grid request")
    # index window needed at each coarser level
    lo = [0] * (level + 1)
    hi = [0] * (level + 1)
    lo[level] = i_lo
    hi[level] = i_hi
    for l in range(level, 0, -1):
        lo[l - 1] = lo[l] >> 1
        hi[l - 1] = (hi[l] + 1) >> 1

    a0, b0 = lo[0], hi[0]
    n0 = b0 - a0 + 1
    prev = np.empty(n0, dtype=np.float64)
    sb = math.sqrt(base_step)
    if a0 <= 0 <= b0:
        prev[0 - a0] = 0.0
    cur = 0.0
    for j in range(1, b0 + 1):
        cur = cur + sb * _normal(seed, TAG_INC_POS, j, 0)
        if j >= a0:
            prev[j - a0] = cur
    cur = 0.0
    for j in range(1, -a0 + 1):
        cur = cur + sb * _normal(seed, TAG_INC_NEG, j, 0)
        if -j <= b0:
            prev[-j - a0] = cur

    for l in range(1, level + 1):
        nl = hi[l] - lo[l] + 1
        out = np.empty(nl, dtype=np.float64)
        sd = 0.5 * math.sqrt(base_step / (1 << (l - 1)))
        off_p = lo[l - 1]
        off = lo[l]
        for idx in range(lo[l], hi[l] + 1):
            if idx & 1 == 0:
                out[idx - off] = prev[(idx >> 1) - off_p]
            else:
                vl = prev[((idx - 1) >> 1) - off_p]
                vr = prev[((idx + 1) >> 1) - off_p]
                out[idx - off] = 0.5 * (vl + vr) + sd * _normal(seed, TAG_MID, l, idx)
        prev = out
    return prev


def _pt_value(seed, t, level, a_time, delta, va, vb):
    """Conditional draw of the path at off-grid time t inside a cell."""
    w = (t - a_time) / delta
    mu = va + w * (vb - va)
    sd = math.sqrt((t - a_time) * ((a_time + delta) - t) / delta)
    return mu + sd * _normal(seed, TAG_PT, float_bits(t), level)


def point_value(seed: int, base_step: float, t: float, level: int) -> float:
    """Path value at an arbitrary time, resolved at the given grid level.

    Grid-aligned times return the canonical node value; other times are
    bridge draws inside the level cell containing t, keyed by (t, level).
    """
    if t == 0.0:
        return 0.0
    delta = base_step / (1 << level)
    x = t / delta
    i = math.floor(x)
    if x == i:
        return float(grid_values(seed, base_step, level, int(i), int(i))[0])
    i = int(i)
    g = grid_values(seed, base_step, level, i, i + 1)
    a_time = i * delta
    return _pt_value(seed, t, level, a_time, delta, float(g[0]), float(g[1]))


def _bridge_max(seed, subseed, s_time, h, v1, v2):
    u = u01(chain_key(seed, TAG_BRMAX, float_bits(s_time), subseed))
    q = -(0.5 * h) * math.log(1.0 - u)
    d = v1 - v2
    return 0.5 * ((v1 + v2) + math.sqrt(d * d + 4.0 * q))


def _bridge_min(seed, subseed, s_time, h, v1, v2):
    u = u01(chain_key(seed, TAG_BRMIN, float_bits(s_time), subseed))
    q = -(0.5 * h) * math.log(1.0 - u)
    d = v1 - v2
    return 0.5 * ((v1 + v2) - math.sqrt(d * d + 4.0 * q))


def interval_extrema(
    seed: int,
    base_step: float,
    lo: float,
    hi: float,
    level: int,
    bridge: bool,
    subseed: int,
) -> tuple:
    """Sampled (min, max) of the path over [lo, hi] at a dyadic grid level.

    Candidates are the grid nodes inside the interval plus conditional
    endpoint values.  With bridge=True each cell between consecutive
    candidates additionally contributes an exact conditional bridge
    maximum and minimum, drawn by inverse CDF from the bridge extremum
    law with a deterministic (cell, subseed) key.
    """
    if not lo < hi:
        raise ValueError("interval_extrema needs lo < hi")
    delta = base_step / (1 << level)
    i_lo = int(math.floor(lo / delta))
    i_hi = int(math.ceil(hi / delta))
    g = grid_values(seed, base_step, level, i_lo, i_hi)

    lo_on_grid = lo == i_lo * delta
    hi_on_grid = hi == i_hi * delta

    times = []
    vals = []
    if lo_on_grid:
        first = i_lo
    else:
        first = i_lo + 1
        times.append(lo)
        vals.append(_pt_value(seed, lo, level, i_lo * delta, delta, float(g[0]), float(g[1])))
    last = i_hi if hi_on_grid else i_hi - 1
    for i in range(first, last + 1):
        times.append(i * delta)
        vals.append(float(g[i - i_lo]))
    if not hi_on_grid:
        times.append(hi)
        vals.append(
            _pt_value(
                seed, hi, level, (i_hi - 1) * delta, delta, float(g[i_hi - 1 - i_lo]), float(g[i_hi - i_lo])
            )
        )

    mn = vals[0]
    mx = vals[0]
    for v in vals[1:]:
        if v < mn:
            mn = v
        if v > mx:
            mx = v
    if bridge:
        for j in range(len(times) - 1):
            h = times[j + 1] - times[j]
            if h <= 0.0:
                continue
            cmx = _bridge_max(seed, subseed, times[j], h, vals[j], vals[j + 1])
            cmn = _bridge_min(seed, subseed, times[j], h, vals[j], vals[j + 1])
            if cmx > mx:
                mx = cmx
            if cmn < mn:
                mn = cmn
    return mn, mx


# ---------------------------------------------------------------------------
# reflected walks
# ---------------------------------------------------------------------------


def walk_values(seed: int, k: int, max_steps: int):
    """Reflected fair walk on [1, k], doubled positions, stopped at k.

    Returns the full value sequence as an int64 array, or None if the walk
    fails to reach k within max_steps positions.  Coin draws are keyed by a
    counter that advances only on genuinely random steps, so forced moves
    (reflections) consume no randomness.
    """
    if k < 2:
        raise ValueError("walk needs k >= 2")
    if max_steps < 3:
        raise ValueError("walk needs max_steps >= 3")
    out = np.empty(max_steps, dtype=np.int64)
    out[0] = 1
    n = 1
    cur = 1
    draws = 0
    while True:
        # even position duplicates the previous value
        if n >= max_steps:
            return None
        out[n] = cur
        n += 1
        # odd position moves
        if cur == 1:
            nxt = 2
        elif cur == k:
            nxt = k - 1
        else:
            h = chain_key(seed, TAG_WALK, draws, 0)
            draws += 1
            nxt = cur + 1 if (h >> 63) else cur - 1
        if n >= max_steps:
            return None
        out[n] = nxt
        n += 1
        cur = nxt
        if cur == k:
            return out[:n].copy()
