"""Forbidden-configuration families for domination-type codes."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

from .config import Configuration, canonical_key
from .grid import GridModel, Vertex, get_grid

__all__ = ["Variant", "ForbiddenFamily", "forbidden_family", "pair_classes", "definition_violation"]


class Variant(str, enum.Enum):
    dominating = "dominating"
    identifying = "identifying"
    strong_identifying = "strong_identifying"
    locating_dominating = "locating_dominating"
    open_locating_dominating = "open_locating_dominating"

    @classmethod
    def parse(cls, name: "str | Variant") -> "Variant":
        if isinstance(name, Variant):
            return name
        key = name.strip().lower().replace("-", "_")
        aliases = {"ld": "locating_dominating", "old": "open_locating_dominating", "strong": "strong_identifying"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown variant {name!r}") from None


@dataclass(frozen=True)
class ForbiddenFamily:
    grid: GridModel
    variant: Variant
    configurations: tuple[Configuration, ...]
    max_diameter: int

    def __iter__(self):
        return iter(self.configurations)

    def __len__(self):
        return len(self.configurations)


def pair_classes(g: GridModel | str, max_dist: int) -> list[tuple[Vertex, Vertex]]:
    """One pair ``(u, v)`` per orbit of unordered vertex pairs at distance 1..max_dist."""
    g = get_grid(g)
    if max_dist < 1:
        return []
    u = g.origin_vertex()
    seen = set()
    out = []
    for v in sorted(g.ball(u, max_dist) - {u}, key=lambda w: (g.distance(u, w), w)):
        key = canonical_key(g, Configuration.of(vertices=(u, v)))
        if key not in seen:
            seen.add(key)
            out.append((u, v))
    return out


def _closed(g, v):
    return frozenset(g.neighbors(v)) | {v}


def _open(g, v):
    return frozenset(g.neighbors(v))


def _zero(vertices) -> Configuration:
    return Configuration.of(nonelements=vertices)


def _raw_family(g: GridModel, variant: Variant) -> list[Configuration]:
    v0 = g.origin_vertex()
    pairs = pair_classes(g, 2)
    out = []
    if variant in (Variant.dominating, Variant.identifying, Variant.strong_identifying, Variant.locating_dominating):
        # for locating-dominating this is {v} u N(v): v outside X and undominated
        out.append(_zero(_closed(g, v0)))
    if variant in (Variant.open_locating_dominating, Variant.strong_identifying):
        out.append(_zero(_open(g, v0)))
    for u, v in pairs:
        if variant is Variant.identifying:
            out.append(_zero(_closed(g, u) ^ _closed(g, v)))
        elif variant is Variant.locating_dominating:
            out.append(_zero({u, v} | (_open(g, u) ^ _open(g, v))))
        elif variant is Variant.open_locating_dominating:
            out.append(_zero(_open(g, u) ^ _open(g, v)))
        elif variant is Variant.strong_identifying:
            for a, b in (
                (_closed(g, u), _closed(g, v)),
                (_open(g, u), _open(g, v)),
                (_closed(g, u), _open(g, v)),
                (_open(g, u), _closed(g, v)),
            ):
                out.append(_zero(a ^ b))
    return out


@lru_cache(maxsize=None)
def _family(kind: str, variant: Variant) -> ForbiddenFamily:
    g = get_grid(kind)
    keyed = {}
    for c in _raw_family(g, variant):
        keyed.setdefault(canonical_key(g, c), c)
    configs = sorted(keyed.values(), key=lambda c: (len(c.V), canonical_key(g, c)))
    diam = max(
        (max((g.distance(a, b) for a in c.V for b in c.V), default=0) for c in configs),
        default=0,
    )
    return ForbiddenFamily(g, variant, tuple(configs), diam)


def forbidden_family(g: GridModel | str, variant: Variant | str) -> ForbiddenFamily:
    """Configurations whose absence characterises ``variant`` on grid ``g``.

    Separation conditions are only generated for pairs at distance at most 2:
    farther apart, the neighbourhoods involved are disjoint, so equal traces
    are both empty and already excluded by the domination-type member.
    """
    return _family(get_grid(g).kind, Variant.parse(variant))


def definition_violation(
    g: GridModel | str,
    variant: Variant | str,
    member: Callable[[Vertex], bool],
    centers: Iterable[Vertex],
    radius: int = 4,
):
    """Check the defining conditions of ``variant`` directly.

    ``member`` decides membership in X.  Every ``u`` in ``centers`` is tested
    on its own and against every ``v`` within ``radius``.  Returns a tuple
    describing the first violated condition, or None.  For strong
    identifying codes an empty open trace counts as a violation, which is
    exact whenever X is periodic.
    """
    g = get_grid(g)
    variant = Variant.parse(variant)

    def trace(s):
        return frozenset(w for w in s if member(w))

    for u in centers:
        Nu, Cu = trace(_open(g, u)), trace(_closed(g, u))
        in_u = member(u)
        if variant in (Variant.dominating, Variant.identifying, Variant.strong_identifying) and not Cu:
            return ("undominated", u)
        if variant is Variant.locating_dominating and not in_u and not Nu:
            return ("undominated", u)
        if variant is Variant.open_locating_dominating and not Nu:
            return ("no open neighbour", u)
        if variant is Variant.strong_identifying and not Nu:
            # two such vertices share the empty open trace; a periodic X has infinitely many
            return ("empty open trace", u)
        if variant is Variant.dominating:
            continue
        for v in g.ball(u, radius):
            if v == u:
                continue
            Nv, Cv = trace(_open(g, v)), trace(_closed(g, v))
            if variant is Variant.identifying and Cu == Cv:
                return ("not separated", u, v)
            if variant is Variant.open_locating_dominating and Nu == Nv:
                return ("not separated", u, v)
            if variant is Variant.locating_dominating and not in_u and not member(v) and Nu == Nv:
                return ("not separated", u, v)
            if variant is Variant.strong_identifying and {Cu, Nu} & {Cv, Nv}:
                return ("not separated", u, v)
    return None
