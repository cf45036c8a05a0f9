"""Compiled inner loops: uniform generators, bounded integers, tile proposals.

All state lives in a ``uint64[4]`` array owned by the caller; the kernels
mutate it in place. ``alg`` selects the generator: 0 = xoshiro256**,
1 = xorshift64* (only ``state[0]`` is used).
"""

import numpy as np
from numba import njit

_M32 = np.uint64(0xFFFFFFFF)
_XS64_MULT = np.uint64(0x2545F4914F6CDD1D)
_INV_2_53 = 1.0 / 9007199254740992.0

XOSHIRO_JUMP = np.array(
    [0x180EC6D33CFD0ABA, 0xD5A61266F0C9392C, 0xA9582618E03FC9AA, 0x39ABDC4529B1661C],
    dtype=np.uint64,
)


@njit(inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(inline="always")
def _xoshiro_next(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    result = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return result


@njit(inline="always")
def _xorshift64s_next(s):
    x = s[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    s[0] = x
    return x * _XS64_MULT


@njit(inline="always")
def next_raw(s, alg):
    if alg == 0:
        return _xoshiro_next(s)
    return _xorshift64s_next(s)


@njit(inline="always")
def _mul128(a, b):
    # (hi, lo) words of the 128-bit product
    a_lo = a & _M32
    a_hi = a >> np.uint64(32)
    b_lo = b & _M32
    b_hi = b >> np.uint64(32)
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    mid = (p0 >> np.uint64(32)) + (p1 & _M32) + (p2 & _M32)
    hi = p3 + (p1 >> np.uint64(32)) + (p2 >> np.uint64(32)) + (mid >> np.uint64(32))
    return hi, a * b


@njit(inline="always")
def bounded(s, alg, n):
    """Unbiased integer in [0, n) by multiply-and-reject (Lemire)."""
    hi, lo = _mul128(next_raw(s, alg), n)
    if lo < n:
        t = (np.uint64(0) - n) % n
        while lo < t:
            hi, lo = _mul128(next_raw(s, alg), n)
    return hi


@njit(inline="always")
def unit(s, alg):
    return np.float64(next_raw(s, alg) >> np.uint64(11)) * _INV_2_53


@njit(cache=True, nogil=True)
def raw_scalar(s, alg):
    return next_raw(s, alg)


@njit(cache=True, nogil=True)
def unit_scalar(s, alg):
    return unit(s, alg)


@njit(cache=True, nogil=True)
def bounded_scalar(s, alg, n):
    return np.int64(bounded(s, alg, np.uint64(n)))


@njit(cache=True, nogil=True)
def fill_raw(s, alg, out):
    for i in range(out.shape[0]):
        out[i] = next_raw(s, alg)


@njit(cache=True, nogil=True)
def fill_unit(s, alg, out):
    for i in range(out.shape[0]):
        out[i] = unit(s, alg)


@njit(cache=True, nogil=True)
def fill_bounded(s, alg, n, out):
    nn = np.uint64(n)
    for i in range(out.shape[0]):
        out[i] = np.int64(bounded(s, alg, nn))


@njit(cache=True, nogil=True)
def xoshiro_jump(s):
    t0 = np.uint64(0)
    t1 = np.uint64(0)
    t2 = np.uint64(0)
    t3 = np.uint64(0)
    for i in range(4):
        word = XOSHIRO_JUMP[i]
        for b in range(64):
            if (word >> np.uint64(b)) & np.uint64(1):
                t0 ^= s[0]
                t1 ^= s[1]
                t2 ^= s[2]
                t3 ^= s[3]
            _xoshiro_next(s)
    s[0] = t0
    s[1] = t1
    s[2] = t2
    s[3] = t3


@njit(cache=True, nogil=True)
def propose(s, alg, x_lo, y_lo, interior, dx, dy, b, xs, ys, border):
    """Generate ``len(xs)`` tile proposals.

    Each proposal draws a tile index and an abscissa inside the tile; only
    Border tiles draw the ordinate. Interior proposals get ``ys = 0``.
    """
    n_tiles = np.uint64(x_lo.shape[0])
    for k in range(xs.shape[0]):
        i = bounded(s, alg, n_tiles)
        x = x_lo[i] + dx * unit(s, alg)
        if x > b:
            x = b
        xs[k] = x
        if interior[i]:
            border[k] = False
            ys[k] = 0.0
        else:
            border[k] = True
            ys[k] = y_lo[i] + dy * unit(s, alg)
