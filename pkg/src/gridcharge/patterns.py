"""Periodic vertex sets: density, validity and exhaustive search.

A pattern is stored as its period lattice in Hermite normal form
``((p, q), (0, s))`` together with the elements inside the fundamental
domain ``0 <= a < p, 0 <= b < s`` of cells.  Validity is decided on the
plane itself by reducing coordinates modulo the lattice, so no torus size
restrictions apply.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import _kernels
from .codes import Variant, forbidden_family
from .config import ConfigFormatError, iter_records, parse_object
from .grid import Automorphism, GridModel, Vertex, get_grid

__all__ = [
    "PeriodicPattern",
    "SearchResult",
    "hnf",
    "pattern_density",
    "pattern_valid",
    "pattern_violation",
    "unroll",
    "lattices",
    "search_optimal",
    "format_pattern",
    "parse_pattern",
]


def hnf(v1: tuple[int, int], v2: tuple[int, int]) -> tuple[tuple[int, int], tuple[int, int]]:
    """Hermite normal form ``((p, q), (0, s))`` of the lattice spanned by ``v1`` and ``v2``."""
    (a, b), (c, d) = v1, v2
    det = a * d - b * c
    if det == 0:
        raise ValueError("period vectors are linearly dependent")
    p, u1, u2 = _xgcd(a, c)
    s = abs(det) // p
    q = (u1 * b + u2 * d) % s
    return (p, q), (0, s)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, x, y)`` with ``g = gcd(a, b) > 0`` and ``a x + b y = g``."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        k, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class PeriodicPattern:
    grid: GridModel
    period: tuple[tuple[int, int], tuple[int, int]]
    elements: frozenset

    @classmethod
    def make(cls, g, v1, v2, elements) -> "PeriodicPattern":
        g = get_grid(g)
        basis = hnf(tuple(v1), tuple(v2))
        proto = cls(g, basis, frozenset())
        return cls(g, basis, frozenset(proto.reduce(v) for v in elements))

    @property
    def cells(self) -> int:
        return self.period[0][0] * self.period[1][1]

    def reduce_cell(self, cell: tuple[int, int]) -> tuple[int, int]:
        (p, q), (_, s) = self.period
        k = cell[0] // p
        return cell[0] - k * p, (cell[1] - k * q) % s

    def reduce(self, v: Vertex) -> Vertex:
        c = self.reduce_cell(v.coords[:2])
        return Vertex(c + v.coords[2:])

    def contains(self, v: Vertex) -> bool:
        return self.reduce(v) in self.elements

    def domain_cells(self) -> list[tuple[int, int]]:
        (p, _), (_, s) = self.period
        return [(a, b) for a in range(p) for b in range(s)]

    def domain(self) -> list[Vertex]:
        return sorted(self.grid.vertices_near(self.domain_cells()))


def pattern_density(pattern: PeriodicPattern) -> Fraction:
    return Fraction(len(pattern.elements), len(pattern.domain()))


def _placements(g: GridModel, config, domain: list[Vertex]) -> Iterator[tuple[Automorphism, list[Vertex]]]:
    """Every copy of ``config`` whose first vertex lies in ``domain``, up to repeats."""
    verts = sorted(config.V)
    seen = set()
    for k in range(g.order):
        rot = [g.rotate(v, k) for v in verts]
        for w in domain:
            a = g.mapping_onto(rot[0], w, 0)
            if a is None:
                continue
            a = g.compose(a, g.rotation(k))
            img = tuple(g.apply(a, v) for v in verts)
            if img not in seen:
                seen.add(img)
                yield a, list(img)


def pattern_violation(pattern: PeriodicPattern, variant) -> tuple[int, Automorphism] | None:
    """First forbidden copy in the periodic extension, as ``(config_index, automorphism)``."""
    g = pattern.grid
    family = forbidden_family(g, variant)
    domain = pattern.domain()
    for idx, c in enumerate(family):
        verts = sorted(c.V)
        for a, img in _placements(g, c, domain):
            lab = {v: pattern.contains(u) for v, u in zip(verts, img)}
            if all(not lab[v] for v in c.S0) and all(lab[v] for v in c.S1):
                return idx, a
    return None


def pattern_valid(pattern: PeriodicPattern, variant) -> bool:
    return pattern_violation(pattern, variant) is None


def unroll(pattern: PeriodicPattern, k1: int, k2: int) -> PeriodicPattern:
    """The same set described with the period lattice ``k1 v1 + k2 v2``."""
    (p, q), (_, s) = pattern.period
    big = PeriodicPattern.make(pattern.grid, (k1 * p, k1 * q), (0, k2 * s), ())
    members = [v for v in big.domain() if pattern.contains(v)]
    return PeriodicPattern.make(pattern.grid, (k1 * p, k1 * q), (0, k2 * s), members)


def lattices(cells: int) -> Iterator[tuple[tuple[int, int], tuple[int, int]]]:
    """Every sublattice of index ``cells``, each once, in HNF."""
    for p in range(1, cells + 1):
        if cells % p:
            continue
        s = cells // p
        for q in range(s):
            yield (p, q), (0, s)


def _masks(pattern: PeriodicPattern, variant, index: dict) -> tuple[np.ndarray, np.ndarray]:
    g = pattern.grid
    out = set()
    for c in forbidden_family(g, variant):
        verts = sorted(c.V)
        for _, img in _placements(g, c, pattern.domain()):
            m0 = m1 = 0
            for v, u in zip(verts, img):
                bit = 1 << index[pattern.reduce(u)]
                if v in c.S1:
                    m1 |= bit
                elif v in c.S0:
                    m0 |= bit
            if not m0 & m1:
                out.add((m0, m1))
    pairs = sorted(out)
    return (
        np.array([m for m, _ in pairs], dtype=np.int64),
        np.array([m for _, m in pairs], dtype=np.int64),
    )


@dataclass
class SearchResult:
    pattern: PeriodicPattern | None
    density: Fraction | None
    lattices_scanned: int


def search_optimal(g: GridModel | str, variant, max_vertices: int, min_vertices: int = 1) -> SearchResult:
    """Least-density valid pattern over every period with at most ``max_vertices`` vertices per domain.

    Ties keep the smaller domain, then the first lattice in enumeration
    order, then the smallest element mask.
    """
    g = get_grid(g)
    variant = Variant.parse(variant)
    per_cell = len(g.vertex_classes())
    if max_vertices > 62:
        raise ValueError("at most 62 vertices per fundamental domain")
    best: tuple[Fraction, PeriodicPattern] | None = None
    scanned = 0
    for cells in range(1, max_vertices // per_cell + 1):
        n = cells * per_cell
        if n < min_vertices:
            continue
        for basis in lattices(cells):
            scanned += 1
            proto = PeriodicPattern(g, basis, frozenset())
            dom = proto.domain()
            index = {v: k for k, v in enumerate(dom)}
            m0, m1 = _masks(proto, variant, index)
            if best is None:
                cap = n
            else:
                cap = math.ceil(best[0] * n) - 1
            if cap < 0:
                continue
            x = int(_kernels.first_valid_by_weight(n, m0, m1, cap))
            if x < 0:
                continue
            pat = PeriodicPattern(g, basis, frozenset(v for v in dom if x >> index[v] & 1))
            best = (Fraction(bin(x).count("1"), n), pat)
    if best is None:
        return SearchResult(None, None, scanned)
    return SearchResult(best[1], best[0], scanned)


# --- text format -------------------------------------------------------------------


def format_pattern(pattern: PeriodicPattern) -> str:
    (p, q), (_, s) = pattern.period
    lines = [f"grid: {pattern.grid.kind}", f"period: {p} {q} / 0 {s}"]
    lines += ["element: " + " ".join(map(str, v.coords)) for v in sorted(pattern.elements)]
    return "\n".join(lines) + "\n"


def parse_pattern(text: str, grid=None) -> PeriodicPattern:
    g = get_grid(grid) if grid is not None else None
    period = None
    elements = []
    for lineno, key, fields in iter_records(text):
        if key == "grid":
            if len(fields) != 1:
                raise ConfigFormatError(f"line {lineno}: expected one grid name")
            g = get_grid(fields[0])
        elif key == "period":
            try:
                nums = [int(t) for t in " ".join(fields).replace("/", " ").split()]
            except ValueError:
                raise ConfigFormatError(f"line {lineno}: period needs four integers") from None
            if len(nums) != 4:
                raise ConfigFormatError(f"line {lineno}: period needs four integers")
            period = ((nums[0], nums[1]), (nums[2], nums[3]))
        elif key == "element":
            if g is None:
                raise ConfigFormatError(f"line {lineno}: 'grid:' must come first")
            obj = parse_object(g, ["vertex", *fields], lineno)
            elements.append(obj)
        else:
            raise ConfigFormatError(f"line {lineno}: unknown record {key!r}")
    if g is None or period is None:
        raise ConfigFormatError("pattern needs 'grid:' and 'period:' records")
    try:
        return PeriodicPattern.make(g, period[0], period[1], elements)
    except ValueError as e:
        raise ConfigFormatError(str(e)) from None
