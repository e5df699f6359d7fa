"""numba versions of the bitmask kernels; same contracts as numpy_impl."""
import numpy as np
from numba import njit, prange


@njit(cache=True)
def _hits(c, m0, m1):
    for j in range(m0.shape[0]):
        if (c & m1[j]) == m1[j] and (c & m0[j]) == 0:
            return True
    return False


@njit(cache=True)
def extend_level(partials, bit, forced, m0, m1):
    one = np.int64(1) << np.int64(bit)
    out = np.empty(2 * partials.shape[0], dtype=np.int64)
    n = 0
    for i in range(partials.shape[0]):
        p = partials[i]
        if forced != 1:
            if not _hits(p, m0, m1):
                out[n] = p
                n += 1
        if forced != 0:
            c = p | one
            if not _hits(c, m0, m1):
                out[n] = c
                n += 1
    return out[:n].copy()


@njit(cache=True, parallel=True)
def gather_bits(values, idx):
    out = np.zeros(values.shape[0], dtype=np.int64)
    for n in prange(values.shape[0]):
        v = values[n]
        acc = np.int64(0)
        for k in range(idx.shape[0]):
            acc |= ((v >> idx[k]) & 1) << k
        out[n] = acc
    return out


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def first_valid_by_weight(nbits, m0, m1, max_weight):
    best = np.int64(-1)
    best_w = max_weight + 1
    total = np.int64(1) << np.int64(nbits)
    for c in range(total):
        w = _popcount(c)
        if w >= best_w:
            continue
        if not _hits(c, m0, m1):
            best = c
            best_w = w
    return best
