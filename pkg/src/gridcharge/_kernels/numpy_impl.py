"""Pure-numpy versions of the bitmask kernels."""
import numpy as np

_CHUNK = 1 << 16


def _violates(cand, m0, m1):
    bad = np.zeros(cand.shape[0], dtype=bool)
    if m0.size == 0:
        return bad
    for lo in range(0, cand.shape[0], _CHUNK):
        c = cand[lo:lo + _CHUNK, None]
        hit = ((c & m1[None, :]) == m1[None, :]) & ((c & m0[None, :]) == 0)
        bad[lo:lo + _CHUNK] = hit.any(axis=1)
    return bad


def extend_level(partials, bit, forced, m0, m1):
    """Append bit ``bit`` (0 then 1) to every partial and drop violators.

    ``forced`` is -1 (free), 0 or 1.  Only masks whose highest bit is ``bit``
    should be passed in.
    """
    one = np.int64(1) << np.int64(bit)
    if forced == 0:
        cand = partials.copy()
    elif forced == 1:
        cand = partials | one
    else:
        cand = np.empty(2 * partials.shape[0], dtype=np.int64)
        cand[0::2] = partials
        cand[1::2] = partials | one
    return cand[~_violates(cand, m0, m1)]


def gather_bits(values, idx):
    """``out[n] = sum_k bit(values[n], idx[k]) << k``."""
    out = np.zeros(values.shape[0], dtype=np.int64)
    for k in range(idx.shape[0]):
        out |= ((values >> idx[k]) & 1) << k
    return out


def first_valid_by_weight(nbits, m0, m1, max_weight):
    """Smallest-popcount subset of ``range(nbits)`` hitting no mask pair.

    Among subsets of equal popcount the numerically least is chosen.
    Returns -1 if none has popcount <= ``max_weight``.
    """
    best = -1
    best_w = max_weight + 1
    total = np.int64(1) << np.int64(nbits)
    step = 1 << 18
    for lo in range(0, int(total), step):
        cand = np.arange(lo, min(lo + step, int(total)), dtype=np.int64)
        w = _popcount(cand)
        keep = w < best_w
        cand, w = cand[keep], w[keep]
        if cand.size == 0:
            continue
        ok = ~_violates(cand, m0, m1)
        if not ok.any():
            continue
        cand, w = cand[ok], w[ok]
        i = np.lexsort((cand, w))[0]
        if w[i] < best_w:
            best_w, best = int(w[i]), int(cand[i])
    return best


def _popcount(a):
    a = a.astype(np.uint64)
    c = np.zeros(a.shape[0], dtype=np.int64)
    while a.any():
        c += (a & np.uint64(1)).astype(np.int64)
        a >>= np.uint64(1)
    return c
