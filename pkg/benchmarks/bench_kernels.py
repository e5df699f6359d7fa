"""Time the numba kernels against the numpy fallback on realistic inputs.

Run with ``python benchmarks/bench_kernels.py``.  Compilation is done once
before timing, and each kernel's outputs are compared between backends.
"""
import argparse
import time

import numpy as np

from gridcharge._kernels import get_backend
from gridcharge.codes import forbidden_family
from gridcharge.config import Configuration, forbidden_masks
from gridcharge.grid import get_grid


def best_of(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def level_inputs(kind, variant, radius):
    g = get_grid(kind)
    c = Configuration.of(vertices=g.ball(g.origin_vertex(), radius))
    order = sorted(c.V)
    m0, m1 = forbidden_masks(g, forbidden_family(g, variant), {v: k for k, v in enumerate(order)})
    # a mask pair is tested at its highest bit
    both = m0 | m1
    top = np.array([int(b).bit_length() - 1 for b in both], dtype=np.int64)
    return len(order), m0, m1, top


def enumerate_all(impl, n, m0, m1, top):
    partials = np.zeros(1, dtype=np.int64)
    for bit in range(n):
        sel = top == bit
        partials = impl.extend_level(partials, bit, -1, m0[sel], m1[sel])
    return np.sort(partials)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    numpy_impl, numba_impl = get_backend("numpy"), get_backend("numba")
    rng = np.random.default_rng(0)

    rows = []
    n, m0, m1, top = level_inputs("hexagonal", "identifying", 3)
    enumerate_all(numba_impl, n, m0, m1, top)  # compile
    for name, impl in (("numpy", numpy_impl), ("numba", numba_impl)):
        t, out = best_of(enumerate_all, impl, n, m0, m1, top, repeat=args.repeat)
        rows.append(("extend_level", f"hex identifying B3 ({n} bits, {out.size} labellings)", name, t, out))

    values = rng.integers(0, 1 << 40, 2_000_000, dtype=np.int64)
    idx = rng.permutation(40)[:24].astype(np.int64)
    numba_impl.gather_bits(values[:10], idx)
    for name, impl in (("numpy", numpy_impl), ("numba", numba_impl)):
        t, out = best_of(impl.gather_bits, values, idx, repeat=args.repeat)
        rows.append(("gather_bits", "2M values, 24 bits", name, t, out))

    numba_impl.first_valid_by_weight(4, m0[:1] & 15, m1[:1] & 15, 4)
    for name, impl in (("numpy", numpy_impl), ("numba", numba_impl)):
        t, out = best_of(impl.first_valid_by_weight, n, m0, m1, n, repeat=args.repeat)
        rows.append(("first_valid_by_weight", f"{n} bits, {m0.size} mask pairs", name, t, out))

    print(f"{'kernel':22s} {'input':45s} {'backend':8s} {'seconds':>9s}")
    for kernel, what, name, t, _ in rows:
        print(f"{kernel:22s} {what:45s} {name:8s} {t:9.4f}")
    for k in range(0, len(rows), 2):
        a, b = rows[k], rows[k + 1]
        assert np.array_equal(np.asarray(a[4]), np.asarray(b[4])), a[0]
        print(f"{a[0]}: speedup {a[3] / b[3]:.1f}x, outputs identical")


if __name__ == "__main__":
    main()
