"""Independent re-check of a certificate.

Nothing here reuses the program builder: embeddings, forbidden copies,
variable names and realizations are all recomputed from the grid
primitives, and every charge is evaluated in scaled integers.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .codes import Variant, forbidden_family
from .grid import GridModel, Vertex, get_grid
from .rules import Rule, format_rule
from .simplex import Certificate

__all__ = ["CertificateMismatch", "Verification", "verify_certificate", "certificate_digest"]


class CertificateMismatch(ValueError):
    """The certificate was produced for another grid, variant or rule set."""


@dataclass
class Verification:
    ok: bool
    w: Fraction
    checked: int
    witness: dict | None = None


def certificate_digest(g: GridModel | str, variant, rules: Sequence[Rule]) -> str:
    g = get_grid(g)
    h = hashlib.sha256()
    h.update(f"{g.kind}\n{Variant.parse(variant).value}\n".encode())
    for r in rules:
        h.update(format_rule(r).encode())
        h.update(b"\x00")
    return h.hexdigest()


def _rule_symmetries(g, rule):
    order = sorted(rule.shape.V)
    pos = {v: k for k, v in enumerate(order)}
    objs = set(rule.shape.V) | set(rule.shape.F)
    ys = list(rule.ys)
    out = []
    for k in range(g.order):
        a = g.mapping_onto(rule.z, rule.z, k)
        if a is None:
            continue
        if {g.apply(a, o) for o in objs} != objs:
            continue
        yimg = [g.apply(a, y) for y in ys]
        if set(yimg) != set(ys):
            continue
        out.append(([pos[g.apply(a, v)] for v in order], [ys.index(y) for y in yimg]))
    return order, out


class _Values:
    """Scaled sigma of (shape labelling, source) for one rule, vectorised.

    The semantic name is recomputed here: the least ``image * t + source``
    over the rule's symmetries, with vertex ``k`` of the sorted shape as
    bit ``k``.
    """

    def __init__(self, g, rule, sigma):
        self.rule = rule
        self.order, syms = _rule_symmetries(g, rule)
        self.t = rule.t
        self.syms = []
        for perm, yperm in syms:
            # bit k moves to perm[k], so image bit m comes from the inverse
            inv = [0] * len(perm)
            for k, m in enumerate(perm):
                inv[m] = k
            self.syms.append((_byte_tables(inv), np.array(yperm, dtype=np.int64)))
        prefix = rule.name + "."
        codes, vals = [], []
        for name, v in sigma.items():
            if not name.startswith(prefix):
                continue
            bits, _, i = name[len(prefix):].rpartition(".")
            if not bits or set(bits) - {"0", "1"} or not i.isdigit():
                continue
            x = sum(1 << k for k, ch in enumerate(bits) if ch == "1")
            codes.append(x * self.t + int(i))
            vals.append(v)
        order = np.argsort(np.array(codes, dtype=np.int64), kind="stable")
        self.codes = np.array(codes, dtype=np.int64)[order]
        self.values = np.array(vals, dtype=object)[order]

    def name(self, code: int) -> str:
        x, i = divmod(int(code), self.t)
        bits = "".join("1" if x >> k & 1 else "0" for k in range(len(self.order)))
        return f"{self.rule.name}.{bits}.{i}"

    def lookup(self, xs: np.ndarray, i: int, dtype):
        best = None
        for tables, yperm in self.syms:
            code = _pull(tables, xs) * self.t + yperm[i]
            best = code if best is None else np.minimum(best, code)
        pos = np.minimum(np.searchsorted(self.codes, best), max(self.codes.size - 1, 0))
        if self.codes.size == 0:
            raise KeyError(self.name(best[0]))
        bad = self.codes[pos] != best
        if bad.any():
            raise KeyError(self.name(best[np.flatnonzero(bad)[0]]))
        return self.values[pos].astype(dtype)


def _embeddings(g, rule, anchor, target):
    seen = set()
    out = []
    objs = sorted(rule.shape.V) + sorted(rule.shape.F) + [rule.z, *rule.ys]
    for k in range(g.order):
        a = g.mapping_onto(anchor, target, k)
        if a is None:
            continue
        image = tuple(g.apply(a, o) for o in objs)
        if image not in seen:
            seen.add(image)
            out.append(a)
    return out


def _forbidden_copies(g, family, pos):
    window = set(pos)
    masks = set()
    for c in family:
        verts = sorted(c.V)
        for k in range(g.order):
            rot = [g.rotate(v, k) for v in verts]
            for w in window:
                a = g.mapping_onto(rot[0], w, 0)
                if a is None:
                    continue
                img = [g.apply(a, v) for v in rot]
                if all(u in window for u in img):
                    m0 = m1 = 0
                    for v, u in zip(verts, img):
                        if v in c.S1:
                            m1 |= 1 << pos[u]
                        elif v in c.S0:
                            m0 |= 1 << pos[u]
                    masks.add((m0, m1))
    return masks


def _byte_tables(pos_list):
    """Tables moving bit ``pos_list[k]`` of a word to bit ``k``, one byte at a time."""
    nbytes = (max(pos_list, default=0) >> 3) + 1
    tables = []
    for b in range(nbytes):
        t = np.zeros(256, dtype=np.int64)
        for val in range(256):
            acc = 0
            for k, p in enumerate(pos_list):
                if p >> 3 == b and val >> (p & 7) & 1:
                    acc |= 1 << k
            t[val] = acc
        tables.append(t)
    return tables


def _pull(tables, xs):
    acc = np.zeros(xs.shape, dtype=np.int64)
    for b, t in enumerate(tables):
        acc |= t[(xs >> (8 * b)) & 255]
    return acc


def _labellings(n, by_top):
    """Every ``n``-bit labelling avoiding the mask pairs, ascending."""
    xs = np.zeros(1, dtype=np.int64)
    for d in range(n):
        xs = np.concatenate([xs, xs | (1 << d)])
        for m0, m1 in by_top[d]:
            xs = xs[((xs & m1) != m1) | ((xs & m0) != 0)]
    return np.sort(xs)


_CHUNK = 1 << 18


def _check_center(g, rules, values, family, center, wL, scale, dtype, progress):
    contribs = []
    verts = {center} if isinstance(center, Vertex) else set()
    for j, rule in enumerate(rules):
        if type(rule.z) is type(center):
            for a in _embeddings(g, rule, rule.z, center):
                contribs.append((j, a, None))
        for i, y in enumerate(rule.ys):
            if type(y) is type(center):
                for a in _embeddings(g, rule, y, center):
                    contribs.append((j, a, i))
    for j, a, _ in contribs:
        verts |= {g.apply(a, v) for v in rules[j].shape.V}
    order = sorted(verts)
    pos = {v: k for k, v in enumerate(order)}
    n = len(order)
    if n > 62:
        raise ValueError("constraint configuration too large to verify")
    by_top: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for m0, m1 in sorted(_forbidden_copies(g, family, pos)):
        by_top[(m0 | m1).bit_length() - 1].append((m0, m1))
    xs_all = _labellings(n, by_top)

    plan = []
    for j, a, i in contribs:
        tables = _byte_tables([pos[g.apply(a, v)] for v in values[j].order])
        plan.append((values[j], tables, i))
    mu_bit = pos[center] if isinstance(center, Vertex) else None
    need = wL if isinstance(center, Vertex) else 0
    for lo in range(0, xs_all.size, _CHUNK):
        xs = xs_all[lo : lo + _CHUNK]
        total = np.zeros(xs.size, dtype=dtype)
        if mu_bit is not None:
            total += ((xs >> mu_bit) & 1).astype(dtype) * scale
        for vals, tables, i in plan:
            shape_x = _pull(tables, xs)
            if i is None:
                for s in range(vals.t):
                    total += vals.lookup(shape_x, s, dtype)
            else:
                total -= vals.lookup(shape_x, i, dtype)
        bad = np.flatnonzero(total < need)
        if bad.size:
            k = int(bad[0])
            x = int(xs[k])
            return lo + k + 1, {
                "center": center,
                "elements": [v for v in order if x >> pos[v] & 1],
                "charge": Fraction(int(total[k]), scale),
                "required": Fraction(need, scale),
            }
        if progress:
            progress(f"checked {lo + xs.size} of {xs_all.size} realizations around {center}")
    return int(xs_all.size), None


def verify_certificate(
    g: GridModel | str,
    variant,
    rules: Sequence[Rule],
    cert: Certificate,
    progress: Callable[[str], None] | None = None,
) -> Verification:
    """Check every realization around every orbit representative.

    Raises :class:`CertificateMismatch` when the certificate names another
    grid, variant or rule set.  Otherwise returns a result whose
    ``witness`` describes the first violated row, if any.
    """
    g = get_grid(g)
    variant = Variant.parse(variant)
    rules = list(rules)
    if cert.grid != g.kind:
        raise CertificateMismatch(f"certificate is for the {cert.grid} grid, not {g.kind}")
    if cert.variant != variant.value:
        raise CertificateMismatch(f"certificate is for {cert.variant} codes, not {variant.value}")
    if cert.hash != certificate_digest(g, variant, rules):
        raise CertificateMismatch("certificate hash does not match the rule set")
    scale = math.lcm(cert.w.denominator, *(v.denominator for v in cert.sigma.values()))
    sigma = {k: int(v * scale) for k, v in cert.sigma.items()}
    wL = int(cert.w * scale)
    # exact int64 sums need headroom for every term of a row
    terms = 1 + sum(len(r.ys) * 64 for r in rules)
    biggest = max([abs(v) for v in sigma.values()] + [abs(wL), scale])
    dtype = np.int64 if biggest * terms < 2**62 else object
    values = [_Values(g, r, sigma) for r in rules]
    family = list(forbidden_family(g, variant))
    _check_transitive(g)
    total = 0
    for center in (g.origin_vertex(), g.origin_face()):
        try:
            count, witness = _check_center(g, rules, values, family, center, wL, scale, dtype, progress)
        except KeyError as e:
            return Verification(False, cert.w, total, {"center": center, "missing_variable": e.args[0]})
        total += count
        if witness is not None:
            return Verification(False, cert.w, total, witness)
    return Verification(True, cert.w, total)


def _check_transitive(g):
    v0, f0 = g.origin_vertex(), g.origin_face()
    cells = [(a, b) for a in range(-1, 2) for b in range(-1, 2)]
    for v in g.vertices_near(cells):
        if not g.automorphisms_onto(v, v0):
            raise AssertionError(f"{v} is not equivalent to {v0}")
    for f in g.faces_near(cells):
        if not g.automorphisms_onto(f, f0):
            raise AssertionError(f"{f} is not equivalent to {f0}")
