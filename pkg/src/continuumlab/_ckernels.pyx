# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirror of _kernels_py.py with identical arithmetic: same operation order,
same libm calls, compiled with -ffp-contract=off so no fused multiply-adds
change rounding.  The parity tests assert bit-for-bit agreement between the
two backends; see _kernels_py.py for the key-domain documentation.
"""

from libc.math cimport ceil, floor, log, sqrt
from libc.string cimport memcpy

import numpy as np

cimport numpy as cnp

cnp.import_array()

MASK64 = (1 << 64) - 1

TAG_INC_POS = 1
TAG_INC_NEG = 2
TAG_MID = 3
TAG_PT = 4
TAG_BRMAX = 5
TAG_BRMIN = 6
TAG_WALK = 7

DEF C_TAG_INC_POS = 1
DEF C_TAG_INC_NEG = 2
DEF C_TAG_MID = 3
DEF C_TAG_PT = 4
DEF C_TAG_BRMAX = 5
DEF C_TAG_BRMIN = 6
DEF C_TAG_WALK = 7

cdef unsigned long long GOLD = 0x9E3779B97F4A7C15ULL


cdef inline unsigned long long _mix64(unsigned long long z) nogil:
    z = z + GOLD
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline unsigned long long _chain(unsigned long long seed, unsigned long long tag,
                                      unsigned long long a, unsigned long long b,
                                      unsigned long long c) nogil:
    cdef unsigned long long h = _mix64(seed ^ (tag * GOLD))
    h = _mix64(h ^ a)
    h = _mix64(h ^ b)
    h = _mix64(h ^ c)
    return h


cdef inline double _u01(unsigned long long h) nogil:
    # 52-bit lattice with half offset: extremes 2^-53 and 1 - 2^-53 are
    # exactly representable, so the value never rounds to 0.0 or 1.0
    return (<double> (h >> 12) + 0.5) * 2.220446049250313e-16


cdef inline double _norm_ppf(double p) nogil:
    cdef double q = p - 0.5
    cdef double r, num, den, val
    if q < 0.425 and q > -0.425:
        r = 0.180625 - q * q
        num = ((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                   + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                 + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
               + 1.3314166789178437745e2) * r + 3.3871328727963666080e0
        den = ((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                   + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                 + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
               + 4.2313330701600911252e1) * r + 1.0
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = sqrt(-log(r))
    if r <= 5.0:
        r = r - 1.6
        num = ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                   + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                 + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
               + 4.63033784615654529590e0) * r + 1.42343711074968357734e0
        den = ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                   + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                 + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
               + 2.05319162663775882187e0) * r + 1.0
    else:
        r = r - 5.0
        num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                   + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                 + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
               + 5.46378491116411436990e0) * r + 6.65790464350110377720e0
        den = ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                   + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                 + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
               + 5.99832206555887937690e-1) * r + 1.0
    val = num / den
    if q < 0.0:
        return -val
    return val


cdef inline double _normal(unsigned long long seed, unsigned long long tag,
                           unsigned long long a, unsigned long long b,
                           unsigned long long c) nogil:
    return _norm_ppf(_u01(_chain(seed, tag, a, b, c)))


cdef inline unsigned long long _f2u(double t) nogil:
    cdef unsigned long long u
    if t == 0.0:
        return 0
    memcpy(&u, &t, 8)
    return u


# ---------------------------------------------------------------------------
# python-visible hashing API (parity-tested against the pure backend)
# ---------------------------------------------------------------------------


def mix64(z):
    return _mix64(<unsigned long long> (z & MASK64))


def chain_key(seed, tag, a, b, c=0):
    return _chain(<unsigned long long> (seed & MASK64), <unsigned long long> (tag & MASK64),
                  <unsigned long long> (a & MASK64), <unsigned long long> (b & MASK64),
                  <unsigned long long> (c & MASK64))


def u01(h):
    return _u01(<unsigned long long> (h & MASK64))


def norm_ppf(p):
    return _norm_ppf(p)


def float_bits(t):
    return _f2u(t)


# ---------------------------------------------------------------------------
# path sampling
# ---------------------------------------------------------------------------


cdef int _grid_fill(unsigned long long seed, double base_step, int level,
                    long long i_lo, long long i_hi, double[::1] out) except -1:
    """Fill out[0 .. i_hi-i_lo] with grid values at the given level."""
    cdef long long lo[64]
    cdef long long hi[64]
    cdef int l
    cdef long long a0, b0, j, idx, off, off_p
    cdef double sb, cur, sd, vl, vr
    cdef cnp.ndarray[double, ndim=1] buf_a, buf_b
    cdef double[::1] prev, nxt

    lo[level] = i_lo
    hi[level] = i_hi
    for l in range(level, 0, -1):
        lo[l - 1] = lo[l] >> 1
        hi[l - 1] = (hi[l] + 1) >> 1

    a0 = lo[0]
    b0 = hi[0]
    buf_a = np.empty(b0 - a0 + 1, dtype=np.float64)
    prev = buf_a
    sb = sqrt(base_step)
    if a0 <= 0 and 0 <= b0:
        prev[0 - a0] = 0.0
    cur = 0.0
    for j in range(1, b0 + 1):
        cur = cur + sb * _normal(seed, C_TAG_INC_POS, <unsigned long long> j, 0, 0)
        if j >= a0:
            prev[j - a0] = cur
    cur = 0.0
    for j in range(1, -a0 + 1):
        cur = cur + sb * _normal(seed, C_TAG_INC_NEG, <unsigned long long> j, 0, 0)
        if -j <= b0:
            prev[-j - a0] = cur

    if level == 0:
        out[:] = prev
        return 0

    for l in range(1, level + 1):
        if l == level:
            nxt = out
        else:
            buf_b = np.empty(hi[l] - lo[l] + 1, dtype=np.float64)
            nxt = buf_b
        sd = 0.5 * sqrt(base_step / <double> (1ULL << (l - 1)))
        off_p = lo[l - 1]
        off = lo[l]
        for idx in range(lo[l], hi[l] + 1):
            if idx & 1 == 0:
                nxt[idx - off] = prev[(idx >> 1) - off_p]
            else:
                vl = prev[((idx - 1) >> 1) - off_p]
                vr = prev[((idx + 1) >> 1) - off_p]
                nxt[idx - off] = 0.5 * (vl + vr) + sd * _normal(
                    seed, C_TAG_MID, <unsigned long long> l, <unsigned long long> idx, 0)
        prev = nxt
        if l < level:
            buf_a = buf_b
    return 0


def grid_values(seed, double base_step, int level, long long i_lo, long long i_hi):
    if level < 0 or i_lo > i_hi:
        raise ValueError("bad grid request")
    if level >= 63:
        raise ValueError("grid level too deep")
    cdef cnp.ndarray[double, ndim=1] out = np.empty(i_hi - i_lo + 1, dtype=np.float64)
    _grid_fill(<unsigned long long> (seed & MASK64), base_step, level, i_lo, i_hi, out)
    return out


cdef inline double _pt(unsigned long long seed, double t, int level, double a_time,
                       double delta, double va, double vb) nogil:
    cdef double w = (t - a_time) / delta
    cdef double mu = va + w * (vb - va)
    cdef double sd = sqrt((t - a_time) * ((a_time + delta) - t) / delta)
    return mu + sd * _norm_ppf(_u01(_chain(seed, C_TAG_PT, _f2u(t),
                                           <unsigned long long> level, 0)))


def point_value(seed, double base_step, double t, int level):
    """Path value at time t resolved at the given grid level."""
    if t == 0.0:
        return 0.0
    if level < 0 or level >= 63:
        raise ValueError("bad level")
    cdef unsigned long long s = <unsigned long long> (seed & MASK64)
    cdef double delta = base_step / <double> (1ULL << level)
    cdef double x = t / delta
    cdef double fl = floor(x)
    cdef long long i = <long long> fl
    cdef cnp.ndarray[double, ndim=1] g
    if x == fl:
        g = np.empty(1, dtype=np.float64)
        _grid_fill(s, base_step, level, i, i, g)
        return g[0]
    g = np.empty(2, dtype=np.float64)
    _grid_fill(s, base_step, level, i, i + 1, g)
    return _pt(s, t, level, i * delta, delta, g[0], g[1])


def interval_extrema(seed, double base_step, double lo, double hi, int level,
                     bint bridge, subseed):
    """Sampled (min, max) of the path over [lo, hi]; see the pure backend."""
    if not lo < hi:
        raise ValueError("interval_extrema needs lo < hi")
    if level < 0 or level >= 63:
        raise ValueError("bad level")
    cdef unsigned long long s = <unsigned long long> (seed & MASK64)
    cdef unsigned long long sub = <unsigned long long> (subseed & MASK64)
    cdef double delta = base_step / <double> (1ULL << level)
    cdef long long i_lo = <long long> floor(lo / delta)
    cdef long long i_hi = <long long> ceil(hi / delta)
    cdef cnp.ndarray[double, ndim=1] g = np.empty(i_hi - i_lo + 1, dtype=np.float64)
    _grid_fill(s, base_step, level, i_lo, i_hi, g)

    cdef bint lo_on_grid = lo == i_lo * delta
    cdef bint hi_on_grid = hi == i_hi * delta

    cdef long long ncand_max = (i_hi - i_lo + 1) + 2
    cdef cnp.ndarray[double, ndim=1] tbuf = np.empty(ncand_max, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] vbuf = np.empty(ncand_max, dtype=np.float64)
    cdef double[::1] times = tbuf
    cdef double[::1] vals = vbuf
    cdef long long n = 0
    cdef long long first, last, i
    if lo_on_grid:
        first = i_lo
    else:
        first = i_lo + 1
        times[n] = lo
        vals[n] = _pt(s, lo, level, i_lo * delta, delta, g[0], g[1])
        n += 1
    last = i_hi if hi_on_grid else i_hi - 1
    for i in range(first, last + 1):
        times[n] = i * delta
        vals[n] = g[i - i_lo]
        n += 1
    if not hi_on_grid:
        times[n] = hi
        vals[n] = _pt(s, hi, level, (i_hi - 1) * delta, delta,
                      g[i_hi - 1 - i_lo], g[i_hi - i_lo])
        n += 1

    cdef double mn = vals[0]
    cdef double mx = vals[0]
    cdef long long j
    cdef double v, h, u, q, d, cmx, cmn
    for j in range(1, n):
        v = vals[j]
        if v < mn:
            mn = v
        if v > mx:
            mx = v
    if bridge:
        for j in range(n - 1):
            h = times[j + 1] - times[j]
            if h <= 0.0:
                continue
            u = _u01(_chain(s, C_TAG_BRMAX, _f2u(times[j]), sub, 0))
            q = -(0.5 * h) * log(1.0 - u)
            d = vals[j] - vals[j + 1]
            cmx = 0.5 * ((vals[j] + vals[j + 1]) + sqrt(d * d + 4.0 * q))
            u = _u01(_chain(s, C_TAG_BRMIN, _f2u(times[j]), sub, 0))
            q = -(0.5 * h) * log(1.0 - u)
            cmn = 0.5 * ((vals[j] + vals[j + 1]) - sqrt(d * d + 4.0 * q))
            if cmx > mx:
                mx = cmx
            if cmn < mn:
                mn = cmn
    return mn, mx


# ---------------------------------------------------------------------------
# reflected walks
# ---------------------------------------------------------------------------


def walk_values(seed, long long k, long long max_steps):
    """Reflected fair walk on [1, k]; see the pure backend for semantics."""
    if k < 2:
        raise ValueError("walk needs k >= 2")
    if max_steps < 3:
        raise ValueError("walk needs max_steps >= 3")
    cdef unsigned long long s = <unsigned long long> (seed & MASK64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(max_steps, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    o[0] = 1
    cdef long long n = 1
    cdef long long cur = 1
    cdef long long nxt
    cdef unsigned long long draws = 0
    cdef unsigned long long hbit
    while True:
        if n >= max_steps:
            return None
        o[n] = cur
        n += 1
        if cur == 1:
            nxt = 2
        elif cur == k:
            nxt = k - 1
        else:
            hbit = _chain(s, C_TAG_WALK, draws, 0, 0) >> 63
            draws += 1
            nxt = cur + 1 if hbit else cur - 1
        if n >= max_steps:
            return None
        o[n] = nxt
        n += 1
        cur = nxt
        if cur == k:
            return out[:n].copy()
