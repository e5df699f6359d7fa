"""Configurations ``(V, S0, S1, F)``, isomorphism, and realization generation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import _kernels
from .grid import Automorphism, Chargeable, Face, GridModel, Vertex, get_grid

__all__ = [
    "Configuration",
    "Realization",
    "canonical_key",
    "isomorphism",
    "is_isomorphic",
    "embeddings_onto",
    "realizations",
    "contains_forbidden",
    "placements_within",
    "forbidden_masks",
    "enumerate_assignments",
    "stabilizer",
    "format_configuration",
    "parse_configuration",
    "ConfigFormatError",
]

ELEMENT, NONELEMENT, FREE = "element", "nonelement", "free"


class ConfigFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Configuration:
    """Vertices ``V`` with nonelements ``S0``, elements ``S1``, and faces ``F``."""

    V: frozenset
    S0: frozenset = frozenset()
    S1: frozenset = frozenset()
    F: frozenset = frozenset()

    def __post_init__(self):
        for name in ("V", "S0", "S1", "F"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.S0 & self.S1:
            raise ValueError("S0 and S1 must be disjoint")
        if not (self.S0 | self.S1) <= self.V:
            raise ValueError("labelled vertices must belong to V")

    @classmethod
    def of(cls, vertices=(), nonelements=(), elements=(), faces=()):
        vs = set(vertices) | set(nonelements) | set(elements)
        return cls(frozenset(vs), frozenset(nonelements), frozenset(elements), frozenset(faces))

    @property
    def undetermined(self) -> frozenset:
        return self.V - self.S0 - self.S1

    def label(self, v: Vertex) -> str:
        if v in self.S1:
            return ELEMENT
        if v in self.S0:
            return NONELEMENT
        return FREE

    def objects(self) -> list[Chargeable]:
        return sorted(self.V) + sorted(self.F)

    def map_objects(self, fn: Callable) -> "Configuration":
        return Configuration(
            frozenset(map(fn, self.V)),
            frozenset(map(fn, self.S0)),
            frozenset(map(fn, self.S1)),
            frozenset(map(fn, self.F)),
        )

    def __len__(self):
        return len(self.V) + len(self.F)


@dataclass(frozen=True)
class Realization:
    """A total labelling of ``base.V``; ``elements`` is the realized ``S1``."""

    base: Configuration
    elements: frozenset

    @property
    def config(self) -> Configuration:
        b = self.base
        return Configuration(b.V, b.V - self.elements, self.elements, b.F)

    def is_element(self, v: Vertex) -> bool:
        return v in self.elements


# --- isomorphism -------------------------------------------------------------


def _sort_key(x: Chargeable):
    return (0 if isinstance(x, Vertex) else 1, x.coords)


def _serialize(c: Configuration) -> tuple:
    out = []
    for v in c.V:
        lab = 1 if v in c.S1 else (0 if v in c.S0 else 2)
        out.append((0, v.coords, lab))
    for f in c.F:
        out.append((1, f.coords, 0))
    out.sort()
    return tuple(out)


def _normalized(g: GridModel, c: Configuration) -> tuple[tuple, tuple[int, int]]:
    anchor = min(list(c.V) + list(c.F), key=_sort_key)
    t = (-anchor.coords[0], -anchor.coords[1])
    return _serialize(g.apply(g.translation(t), c)), t


def canonical_key(g: GridModel, c: Configuration) -> bytes:
    """Key equal for two configurations iff they are isomorphic."""
    if len(c) == 0:
        raise ValueError("canonical key of an empty configuration")
    g = get_grid(g)
    best = min(_normalized(g, g.apply(g.rotation(k), c))[0] for k in range(g.order))
    return repr((g.kind, best)).encode()


def isomorphism(g: GridModel, c1: Configuration, c2: Configuration) -> Automorphism | None:
    """An automorphism mapping ``c1`` onto ``c2`` (labels preserved), or None."""
    g = get_grid(g)
    if (len(c1.V), len(c1.S0), len(c1.S1), len(c1.F)) != (len(c2.V), len(c2.S0), len(c2.S1), len(c2.F)):
        return None
    if len(c1) == 0:
        return g.identity()
    target, t2 = _normalized(g, c2)
    for k in range(g.order):
        img, t1 = _normalized(g, g.apply(g.rotation(k), c1))
        if img == target:
            # translate by t1, then undo t2
            return Automorphism(k, (t1[0] - t2[0], t1[1] - t2[1]))
    return None


def is_isomorphic(g: GridModel, c1: Configuration, c2: Configuration) -> bool:
    return isomorphism(g, c1, c2) is not None


def stabilizer(g: GridModel, c: Configuration, fixed: Sequence[Chargeable] = ()) -> list[Automorphism]:
    """Automorphisms mapping ``c`` onto itself and fixing each of ``fixed``."""
    g = get_grid(g)
    objs = c.objects()
    if not objs:
        return [g.identity()]
    anchor = fixed[0] if fixed else objs[0]
    pool = [anchor] if fixed else [o for o in objs if type(o) is type(anchor)]
    out = []
    for target in pool:
        for a in g.automorphisms_onto(anchor, target):
            if all(g.apply(a, o) == o for o in fixed) and g.apply(a, c) == c:
                out.append(a)
    return sorted(set(out), key=lambda a: (a.rot, a.shift))


def embeddings_onto(
    g: GridModel,
    shape: Configuration,
    anchor: Chargeable,
    target: Chargeable,
    marked: Sequence[Chargeable] = (),
) -> list[Automorphism]:
    """Embeddings ``pi`` of ``shape`` with ``pi(anchor) = target``.

    Two automorphisms agreeing on every object of ``shape`` and on ``marked``
    are the same embedding, so only one of them is returned.
    """
    g = get_grid(g)
    if type(anchor) is not type(target):
        raise ValueError("anchor and target must both be vertices or both faces")
    ordered = shape.objects() + list(marked)
    seen = set()
    out = []
    for a in g.automorphisms_onto(anchor, target):
        image = tuple(g.apply(a, o) for o in ordered)
        if image not in seen:
            seen.add(image)
            out.append(a)
    return out


# --- forbidden configurations inside a window --------------------------------


def placements_within(g: GridModel, c: Configuration, window: set) -> Iterator[Automorphism]:
    """Automorphisms placing every vertex of ``c`` inside ``window`` (no repeats of images)."""
    g = get_grid(g)
    verts = sorted(c.V)
    if not verts:
        return
    seen = set()
    ordered = sorted(window)
    for k in range(g.order):
        rot = [g.rotate(v, k) for v in verts]
        base = rot[0]
        for w in ordered:
            if g.class_of(w) != g.class_of(base):
                continue
            t = (w.coords[0] - base.coords[0], w.coords[1] - base.coords[1])
            image = []
            for v in rot:
                u = type(v)((v.coords[0] + t[0], v.coords[1] + t[1]) + v.coords[2:])
                if u not in window:
                    break
                image.append(u)
            else:
                key = tuple(image)
                if key not in seen:
                    seen.add(key)
                    yield Automorphism(k, t)


def forbidden_masks(g: GridModel, forbidden: Iterable[Configuration], index: dict) -> tuple[np.ndarray, np.ndarray]:
    """Bitmask pairs ``(m0, m1)`` of every forbidden copy inside ``index``'s keys.

    A labelling ``x`` (bit ``index[v]`` set iff ``v`` is an element) contains
    a copy iff ``x & m1 == m1 and x & m0 == 0``.
    """
    g = get_grid(g)
    window = set(index)
    pairs = set()
    for c in forbidden:
        for a in placements_within(g, c, window):
            m0 = sum(1 << index[g.apply(a, v)] for v in c.S0)
            m1 = sum(1 << index[g.apply(a, v)] for v in c.S1)
            pairs.add((m0, m1))
    pairs = sorted(pairs)
    m0 = np.array([p[0] for p in pairs], dtype=np.int64)
    m1 = np.array([p[1] for p in pairs], dtype=np.int64)
    return m0, m1


def enumerate_assignments(nbits: int, m0: np.ndarray, m1: np.ndarray, forced0: int = 0, forced1: int = 0) -> np.ndarray:
    """All ``nbits``-bit labellings avoiding every mask pair, ascending.

    Bits are fixed in index order and a mask pair is tested as soon as its
    highest bit is assigned, so violating prefixes are pruned immediately.
    """
    if nbits > 62:
        raise ValueError("at most 62 vertices are supported per window")
    if forced0 & forced1:
        return np.zeros(0, dtype=np.int64)
    m0 = np.asarray(m0, dtype=np.int64)
    m1 = np.asarray(m1, dtype=np.int64)
    both = m0 | m1
    if m0.size and (both == 0).any():
        return np.zeros(0, dtype=np.int64)
    top = np.array([int(x).bit_length() - 1 for x in both.tolist()], dtype=np.int64)
    partials = np.zeros(1, dtype=np.int64)
    for bit in range(nbits):
        sel = top == bit
        forced = 0 if forced0 >> bit & 1 else (1 if forced1 >> bit & 1 else -1)
        partials = _kernels.extend_level(partials, bit, forced, m0[sel], m1[sel])
        if partials.size == 0:
            break
    return np.sort(partials)


def realizations(g: GridModel, c: Configuration, forbidden: Iterable[Configuration], mode: str = "all") -> Iterator[Realization]:
    """F-realizations of ``c`` in a deterministic order.

    ``mode="up_to_stabilizer"`` keeps one representative per orbit of the
    automorphisms preserving ``c``.
    """
    if mode not in ("all", "up_to_stabilizer"):
        raise ValueError(f"unknown mode {mode!r}")
    g = get_grid(g)
    order = sorted(c.V)
    index = {v: i for i, v in enumerate(order)}
    m0, m1 = forbidden_masks(g, list(forbidden), index)
    f0 = sum(1 << index[v] for v in c.S0)
    f1 = sum(1 << index[v] for v in c.S1)
    xs = enumerate_assignments(len(order), m0, m1, f0, f1)
    if mode == "up_to_stabilizer" and xs.size:
        xs = _orbit_minima(xs, _vertex_permutations(g, c, order, index))
    for x in xs.tolist():
        yield Realization(c, frozenset(v for v in order if x >> index[v] & 1))


def _vertex_permutations(g, c, order, index, fixed=()):
    perms = []
    for a in stabilizer(g, c, fixed):
        perms.append(np.array([index[g.apply(a, v)] for v in order], dtype=np.int64))
    return perms


def _orbit_minima(xs: np.ndarray, perms) -> np.ndarray:
    best = xs.copy()
    for p in perms:
        # bit k of the image sits at p[k]; gather_bits reads positions p_inv
        inv = np.empty_like(p)
        inv[p] = np.arange(p.size)
        best = np.minimum(best, _kernels.gather_bits(xs, inv))
    return xs[best == xs]


def contains_forbidden(g: GridModel, r, forbidden: Iterable[Configuration]):
    """First ``(config_index, automorphism)`` embedding a forbidden copy in ``r``, else None."""
    g = get_grid(g)
    cfg = r.config if isinstance(r, Realization) else r
    window = set(cfg.V)
    for i, c in enumerate(forbidden):
        for a in placements_within(g, c, window):
            if all(g.apply(a, v) in cfg.S0 for v in c.S0) and all(g.apply(a, v) in cfg.S1 for v in c.S1):
                return i, a
    return None


# --- text format --------------------------------------------------------------


def format_configuration(g: GridModel, c: Configuration, header: bool = True) -> str:
    g = get_grid(g)
    lines = [f"grid: {g.kind}"] if header else []
    for v in sorted(c.V):
        lines.append("vertex: " + " ".join(map(str, v.coords)) + " " + c.label(v))
    for f in sorted(c.F):
        lines.append("face: " + " ".join(map(str, f.coords)))
    return "\n".join(lines) + "\n"


def _coords(g: GridModel, kind: str, fields: list[str], lineno: int) -> tuple[int, ...]:
    want = len((g.origin_vertex() if kind == "vertex" else g.origin_face()).coords)
    if len(fields) != want:
        raise ConfigFormatError(f"line {lineno}: {kind} needs {want} integer coordinates")
    try:
        coords = tuple(int(t) for t in fields)
    except ValueError:
        raise ConfigFormatError(f"line {lineno}: malformed coordinates {' '.join(fields)!r}") from None
    valid = g.vertex_classes() if kind == "vertex" else g.face_classes()
    if coords[2:] not in valid:
        raise ConfigFormatError(f"line {lineno}: invalid {kind} coordinates {coords}")
    return coords


def iter_records(text: str):
    """Yield ``(lineno, key, fields)`` for each non-comment line."""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigFormatError(f"line {lineno}: expected 'key: value'")
        key, rest = line.split(":", 1)
        yield lineno, key.strip().lower(), rest.split()


def parse_object(g: GridModel, fields: list[str], lineno: int) -> Chargeable:
    if not fields or fields[0] not in ("vertex", "face"):
        raise ConfigFormatError(f"line {lineno}: expected 'vertex' or 'face'")
    coords = _coords(g, fields[0], fields[1:], lineno)
    return Vertex(coords) if fields[0] == "vertex" else Face(coords)


def parse_configuration(text: str, grid: GridModel | str | None = None, extra=None) -> tuple[GridModel, Configuration]:
    """Parse the line format written by :func:`format_configuration`.

    ``extra(lineno, key, fields)`` receives unknown records; without it they
    are an error.
    """
    g = get_grid(grid) if grid is not None else None
    V, S0, S1, F = set(), set(), set(), set()
    for lineno, key, fields in iter_records(text):
        if key == "grid":
            if len(fields) != 1:
                raise ConfigFormatError(f"line {lineno}: grid takes one name")
            g = get_grid(fields[0])
        elif key in ("vertex", "face"):
            if g is None:
                raise ConfigFormatError(f"line {lineno}: 'grid:' must come first")
            if key == "vertex":
                label = FREE
                if fields and fields[-1] in (ELEMENT, NONELEMENT, FREE):
                    label = fields[-1]
                    fields = fields[:-1]
                v = Vertex(_coords(g, "vertex", fields, lineno))
                V.add(v)
                {ELEMENT: S1, NONELEMENT: S0, FREE: set()}[label].add(v)
            else:
                F.add(Face(_coords(g, "face", fields, lineno)))
        elif extra is not None:
            extra(lineno, key, fields, g)
        else:
            raise ConfigFormatError(f"line {lineno}: unknown record {key!r}")
    if g is None:
        raise ConfigFormatError("missing 'grid:' record")
    try:
        return g, Configuration(frozenset(V), frozenset(S0), frozenset(S1), frozenset(F))
    except ValueError as e:
        raise ConfigFormatError(str(e)) from None
