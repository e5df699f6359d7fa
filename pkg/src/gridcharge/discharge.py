"""Charge transfers of a rule set applied to a concrete periodic set."""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Sequence

import numpy as np

from .grid import Chargeable, GridModel
from .rules import Rule, VariableTable


def transfers(
    g: GridModel,
    rules: Sequence[Rule],
    tables: Sequence[VariableTable],
    sigma: dict[str, Fraction],
    member,
    targets: Sequence[Chargeable],
) -> dict[tuple[Chargeable, Chargeable], Fraction]:
    """Total charge moved ``(source, target)`` by every embedding whose ``z`` lands in ``targets``."""
    moved: dict = defaultdict(Fraction)
    for rule, table in zip(rules, tables):
        for target in targets:
            seen = set()
            for a in g.automorphisms_onto(rule.z, target):
                key = tuple(g.apply(a, o) for o in rule.shape.objects() + [rule.z, *rule.ys])
                if key in seen:
                    continue
                seen.add(key)
                x = sum(1 << k for k, v in enumerate(rule.vertex_order) if member(g.apply(a, v)))
                row = table.lookup(np.array([x], dtype=np.int64))[0]
                for i, y in enumerate(rule.ys):
                    amount = sigma[table.names[int(table.ids[row, i])]]
                    moved[(g.apply(a, y), target)] += amount
    return dict(moved)


def net_from_transfers(moved: dict, objects: Sequence[Chargeable]) -> dict[Chargeable, Fraction]:
    net = {o: Fraction(0) for o in objects}
    for (src, dst), amount in moved.items():
        if dst in net:
            net[dst] += amount
        if src in net:
            net[src] -= amount
    return net
