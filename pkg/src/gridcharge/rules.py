"""Discharging rules: shapes, the built-in catalog, rule files, variable tables."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .config import (
    ConfigFormatError,
    Configuration,
    enumerate_assignments,
    format_configuration,
    forbidden_masks,
    parse_configuration,
    parse_object,
    stabilizer,
)
from .grid import Chargeable, Face, GridModel, Vertex, get_grid

__all__ = [
    "Rule",
    "RuleError",
    "VariableTable",
    "builtin_rule",
    "builtin_names",
    "parse_rule",
    "format_rule",
    "allocate_variables",
]


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    """Charge moves to ``z`` from each ``ys[i]``; the amount depends on the labelling of ``shape``."""

    name: str
    grid: GridModel
    shape: Configuration
    z: Chargeable
    ys: tuple

    def __post_init__(self):
        objs = set(self.shape.V) | set(self.shape.F)
        if self.z not in objs:
            raise RuleError(f"rule {self.name}: z = {self.z} is not in the shape")
        if not self.ys:
            raise RuleError(f"rule {self.name}: at least one source y is required")
        for y in self.ys:
            if y not in objs:
                raise RuleError(f"rule {self.name}: source {y} is not in the shape")
            if y == self.z:
                raise RuleError(f"rule {self.name}: a source coincides with z")
        if len(set(self.ys)) != len(self.ys):
            raise RuleError(f"rule {self.name}: repeated source")
        if self.shape.S0 or self.shape.S1:
            raise RuleError(f"rule {self.name}: shape vertices must be undetermined")

    @property
    def t(self) -> int:
        return len(self.ys)

    @cached_property
    def vertex_order(self) -> tuple[Vertex, ...]:
        return tuple(sorted(self.shape.V))

    @cached_property
    def symmetries(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """``(vertex_perm, source_perm)`` for each automorphism fixing ``z`` and permuting the sources.

        ``vertex_perm[k]`` is the position of the image of vertex ``k``.
        """
        g = self.grid
        index = {v: k for k, v in enumerate(self.vertex_order)}
        ypos = {y: i for i, y in enumerate(self.ys)}
        out = []
        for a in stabilizer(g, self.shape, fixed=[self.z]):
            images = [g.apply(a, y) for y in self.ys]
            if set(images) != set(self.ys):
                continue
            vp = np.array([index[g.apply(a, v)] for v in self.vertex_order], dtype=np.int64)
            yp = np.array([ypos[y] for y in images], dtype=np.int64)
            out.append((vp, yp))
        return tuple(out)

    @cached_property
    def exchange_distance(self) -> int:
        """Largest distance between ``z`` and a source."""
        return max(self.grid.object_distance(self.z, y) for y in self.ys)

    @cached_property
    def radius(self) -> int:
        """Largest distance from ``z`` to any object of the shape."""
        return max(self.grid.object_distance(self.z, o) for o in self.shape.objects())


# --- built-in catalog ----------------------------------------------------------


def _vertices_of(g, faces):
    return {v for f in faces for v in g.face_vertices(f)}


def _rule_V(g, i):
    z = g.origin_vertex()
    faces = g.incident_faces(z)
    return Configuration.of(vertices=g.ball(z, i), faces=faces), z, faces


def _rule_N(g):
    z = g.origin_vertex()
    faces = g.incident_faces(z)
    return Configuration.of(vertices=_vertices_of(g, faces), faces=faces), z, faces


def _rule_F13(g):
    z = g.origin_face()
    adj = g.adjacent_faces(z)
    f1, f2, f3 = adj[0], adj[1], adj[2]
    ys = tuple(v for v in g.face_vertices(z) if v in g.face_vertices(f2))
    faces = (z, f1, f2, f3)
    return Configuration.of(vertices=_vertices_of(g, faces), faces=faces), z, ys


def _rule_C1(g):
    z = g.origin_vertex()
    y = g.neighbors(z)[0]
    faces = [f for f in g.incident_faces(z) if y in g.face_vertices(f)]
    return Configuration.of(vertices=_vertices_of(g, faces), faces=faces), z, (y,)


def _rule_C2(g):
    z = g.origin_vertex()
    f = g.incident_faces(z)[0]
    ys = tuple(v for v in g.face_vertices(f) if g.distance(z, v) == 2)
    if not ys:
        raise RuleError(f"C2 is not defined on the {g.kind} grid (no face vertex at distance 2)")
    on_f = set(g.face_vertices(f))
    verts = on_f | {w for v in on_f for w in g.neighbors(v)}
    return Configuration.of(vertices=verts, faces=[f]), z, ys


def _rule_E1(g):
    z = g.origin_face()
    y = g.adjacent_faces(z)[0]
    return Configuration.of(vertices=_vertices_of(g, [z, y]), faces=[z, y]), z, (y,)


def _rule_E6(g):
    z = g.origin_face()
    adj = g.adjacent_faces(z)
    if len(adj) != 6:
        raise RuleError(f"E6 needs six adjacent faces; not defined on the {g.kind} grid")
    on_z = set(g.face_vertices(z))
    verts = on_z | {w for v in on_z for w in g.neighbors(v)}
    return Configuration.of(vertices=verts, faces=(z,) + adj), z, adj


_CATALOG = {
    "V1": lambda g: _rule_V(g, 1),
    "V2": lambda g: _rule_V(g, 2),
    "V3": lambda g: _rule_V(g, 3),
    "N": _rule_N,
    "F13": _rule_F13,
    "C1": _rule_C1,
    "C2": _rule_C2,
    "E1": _rule_E1,
    "E6": _rule_E6,
}


def builtin_names() -> list[str]:
    return list(_CATALOG)


def _normalize_name(name: str) -> str:
    return re.sub(r"[\s_{},]", "", name).upper()


def builtin_rule(g: GridModel | str, name: str) -> Rule:
    g = get_grid(g)
    key = _normalize_name(name)
    if key not in _CATALOG:
        raise RuleError(f"unknown rule {name!r}; built-in rules are {', '.join(_CATALOG)}")
    shape, z, ys = _CATALOG[key](g)
    return Rule(key, g, shape, z, tuple(ys))


# --- rule files ------------------------------------------------------------------


def _object_text(o: Chargeable) -> str:
    kind = "vertex" if isinstance(o, Vertex) else "face"
    return kind + " " + " ".join(map(str, o.coords))


def format_rule(rule: Rule) -> str:
    lines = [f"name: {rule.name}", format_configuration(rule.grid, rule.shape).rstrip("\n")]
    lines.append("z: " + _object_text(rule.z))
    lines += ["y: " + _object_text(y) for y in rule.ys]
    return "\n".join(lines) + "\n"


def parse_rule(text: str, grid: GridModel | str | None = None) -> Rule:
    """Parse a rule file; raises :class:`RuleError` on malformed input."""
    meta = {"name": None, "z": None, "ys": []}

    def extra(lineno, key, fields, g):
        if key == "name":
            if not fields:
                raise ConfigFormatError(f"line {lineno}: empty name")
            meta["name"] = "_".join(fields)
        elif key in ("z", "y"):
            if g is None:
                raise ConfigFormatError(f"line {lineno}: 'grid:' must come first")
            obj = parse_object(g, fields, lineno)
            if key == "z":
                if meta["z"] is not None:
                    raise ConfigFormatError(f"line {lineno}: z given twice")
                meta["z"] = obj
            else:
                meta["ys"].append(obj)
        else:
            raise ConfigFormatError(f"line {lineno}: unknown record {key!r}")

    try:
        g, shape = parse_configuration(text, grid, extra=extra)
    except ConfigFormatError as e:
        raise RuleError(str(e)) from None
    if meta["name"] is None:
        raise RuleError("rule file has no 'name:' record")
    if meta["z"] is None:
        raise RuleError("rule file has no 'z:' record")
    return Rule(meta["name"], g, shape, meta["z"], tuple(meta["ys"]))


# --- variables ----------------------------------------------------------------------


@dataclass
class VariableTable:
    """Maps (realization of a rule's shape, source index) to a local variable id.

    ``keys`` holds the valid realizations (bit ``k`` set iff vertex ``k`` of
    ``rule.vertex_order`` is an element) in ascending order; ``ids[n, i]`` is
    the variable for realization ``keys[n]`` and source ``i``.
    """

    rule: Rule
    keys: np.ndarray
    ids: np.ndarray
    names: list[str] = field(default_factory=list)

    @property
    def locality(self) -> int:
        return self.rule.exchange_distance

    def __len__(self):
        return len(self.names)

    def lookup(self, realization: np.ndarray) -> np.ndarray:
        """Row positions in ``ids`` for an array of realizations; raises if any is missing."""
        realization = np.asarray(realization, dtype=np.int64)
        if self.keys.size == 0:
            if realization.size:
                raise LookupError(f"rule {self.rule.name}: no variables allocated")
            return np.zeros(0, dtype=np.int64)
        pos = np.searchsorted(self.keys, realization)
        pos = np.minimum(pos, self.keys.size - 1)
        if not np.array_equal(self.keys[pos], realization):
            bad = realization[self.keys[pos] != realization][0]
            raise LookupError(f"rule {self.rule.name}: realization {int(bad):#x} has no variable")
        return pos

    def variable(self, elements, i: int) -> str:
        """Name of the variable for a realization given as a set of shape vertices."""
        x = sum(1 << k for k, v in enumerate(self.rule.vertex_order) if v in elements)
        return self.names[int(self.ids[self.lookup(np.array([x]))[0], i])]


def variable_name(rule: Rule, x: int, i: int) -> str:
    bits = "".join("1" if x >> k & 1 else "0" for k in range(len(rule.vertex_order)))
    return f"{rule.name}.{bits}.{i}"


def allocate_variables(rule: Rule, forbidden) -> VariableTable:
    """One variable per orbit of (realization, source) under the rule's symmetries."""
    g = rule.grid
    order = rule.vertex_order
    index = {v: k for k, v in enumerate(order)}
    m0, m1 = forbidden_masks(g, list(forbidden), index)
    xs = enumerate_assignments(len(order), m0, m1)
    t = rule.t
    codes = np.full((xs.size, t), np.iinfo(np.int64).max, dtype=np.int64)
    base = np.arange(t, dtype=np.int64)
    for vp, yp in rule.symmetries:
        inv = np.empty_like(vp)
        inv[vp] = np.arange(vp.size)
        img = _kernels.gather_bits(xs, inv)
        # source i of the original becomes source yp[i] of the image
        codes = np.minimum(codes, img[:, None] * t + yp[base][None, :])
    uniq = np.unique(codes)
    ids = np.searchsorted(uniq, codes)
    names = [variable_name(rule, int(c) // t, int(c) % t) for c in uniq.tolist()]
    return VariableTable(rule, xs, ids.astype(np.int64), names)
