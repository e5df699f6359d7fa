"""Constraint configurations and the linear program they generate.

The program has variables ``x = (w, sigma_1, ..., sigma_n)``.  Every row
reads ``const + a . x >= 0`` and the objective is to maximise ``w``:

* a row per realization of the constraint configuration around a vertex
  representative: ``mu + received - sent - w >= 0``;
* a row per realization around a face representative:
  ``received - sent >= 0``;
* the cap row ``1 - w >= 0``.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .codes import Variant, forbidden_family
from .config import Configuration, embeddings_onto, enumerate_assignments, forbidden_masks, stabilizer
from .grid import Automorphism, Chargeable, GridModel, Vertex, get_grid
from .rules import Rule, VariableTable, allocate_variables, format_rule

__all__ = [
    "Contribution",
    "ConstraintConfiguration",
    "LinearProgram",
    "orbit_representatives",
    "constraint_configuration",
    "build_lp",
    "rules_hash",
    "export_lp",
    "parse_native_lp",
    "LPFormatError",
]

ROW_VERTEX, ROW_FACE, ROW_CAP = 0, 1, 2


class LPFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Contribution:
    """One embedding of a rule touching the center.

    ``source`` is None when the center plays ``z`` (it receives from every
    source), otherwise the index of the source the center plays.
    """

    rule_index: int
    automorphism: Automorphism
    source: int | None


@dataclass(frozen=True)
class ConstraintConfiguration:
    center: Chargeable
    vertices: tuple[Vertex, ...]
    faces: tuple
    contributions: tuple[Contribution, ...]

    @property
    def index(self) -> dict:
        return {v: k for k, v in enumerate(self.vertices)}

    @property
    def configuration(self) -> Configuration:
        return Configuration.of(vertices=self.vertices, faces=self.faces)


def orbit_representatives(g: GridModel | str) -> list[Chargeable]:
    """One vertex or face per orbit of the automorphism group, found by search."""
    g = get_grid(g)
    cells = [(a, b) for a in range(-1, 2) for b in range(-1, 2)]
    reps: list = []
    pool = [g.origin_vertex(), g.origin_face()] + sorted(g.vertices_near(cells)) + sorted(g.faces_near(cells))
    for x in pool:
        if not any(type(r) is type(x) and g.automorphisms_onto(r, x) for r in reps):
            reps.append(x)
    return reps


def constraint_configuration(g: GridModel | str, rules: Sequence[Rule], center: Chargeable) -> ConstraintConfiguration:
    """Union of every rule embedding in which ``center`` receives or sends."""
    g = get_grid(g)
    contribs = []
    vertices = set()
    faces = set()
    for j, rule in enumerate(rules):
        marked = [rule.z, *rule.ys]
        found = []
        if type(rule.z) is type(center):
            found += [(a, None) for a in embeddings_onto(g, rule.shape, rule.z, center, marked)]
        for i, y in enumerate(rule.ys):
            if type(y) is type(center):
                found += [(a, i) for a in embeddings_onto(g, rule.shape, y, center, marked)]
        for a, i in found:
            contribs.append(Contribution(j, a, i))
            vertices |= {g.apply(a, v) for v in rule.shape.V}
            faces |= {g.apply(a, f) for f in rule.shape.F}
    if isinstance(center, Vertex):
        vertices.add(center)
    else:
        faces.add(center)
    order = tuple(sorted(vertices, key=lambda v: (g.object_distance(center, v), v)))
    return ConstraintConfiguration(center, order, tuple(sorted(faces)), tuple(contribs))


def rules_hash(g: GridModel | str, variant: Variant | str, rules: Sequence[Rule]) -> str:
    """Digest binding a certificate to the grid, the code variant and the rule texts."""
    g = get_grid(g)
    h = hashlib.sha256()
    h.update(f"{g.kind}\n{Variant.parse(variant).value}\n".encode())
    for r in rules:
        h.update(format_rule(r).encode())
        h.update(b"\x00")
    return h.hexdigest()


@dataclass
class LinearProgram:
    """Rows ``const + A x >= 0`` (CSR arrays) for maximising ``x[0] = w``."""

    grid: GridModel
    variant: Variant
    rules: tuple[Rule, ...]
    var_names: list[str]
    const: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    row_kind: np.ndarray
    row_center: np.ndarray
    row_realization: np.ndarray
    centers: list[ConstraintConfiguration]
    stats: dict = field(default_factory=dict)
    # candidate variables whose terms cancel in every row; any value works
    unused: list[str] = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return self.const.size

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def hash(self) -> str:
        return rules_hash(self.grid, self.variant, self.rules)

    @property
    def locality(self) -> int:
        return max(r.exchange_distance for r in self.rules)

    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n_rows, self.n_vars))

    def restrict(self, rows) -> "LinearProgram":
        """The program made of the given rows only, in that order."""
        rows = np.asarray(rows, dtype=np.int64)
        sub = self.matrix()[rows]
        return replace(
            self,
            const=self.const[rows],
            indptr=sub.indptr.astype(np.int64),
            indices=sub.indices.astype(np.int64),
            data=sub.data.astype(np.int64),
            row_kind=self.row_kind[rows],
            row_center=self.row_center[rows],
            row_realization=self.row_realization[rows],
            stats={},
        )

    def row(self, r: int) -> tuple[int, dict[int, int]]:
        lo, hi = self.indptr[r], self.indptr[r + 1]
        return int(self.const[r]), dict(zip(self.indices[lo:hi].tolist(), self.data[lo:hi].tolist()))

    def slacks(self, x: Sequence[Fraction]) -> list[Fraction]:
        """Exact ``const + A x`` for every row."""
        out = []
        for r in range(self.n_rows):
            c, coeffs = self.row(r)
            out.append(Fraction(c) + sum(Fraction(a) * x[j] for j, a in coeffs.items()))
        return out


class _CenterRows:
    """Vectorised row terms for one constraint configuration."""

    def __init__(self, g, rules, tables, offsets, cc: ConstraintConfiguration):
        index = cc.index
        self.cc = cc
        self.gathers = []
        for c in cc.contributions:
            rule = rules[c.rule_index]
            vmap = np.array([index[g.apply(c.automorphism, v)] for v in rule.vertex_order], dtype=np.int64)
            if c.source is None:
                srcs, sign = list(range(rule.t)), 1
            else:
                srcs, sign = [c.source], -1
            self.gathers.append((vmap, tables[c.rule_index], offsets[c.rule_index], srcs, sign))
        self.mu_bit = index[cc.center] if isinstance(cc.center, Vertex) else None

    def terms(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(mu, cols, signs)``: column ``cols[n, e]`` enters row ``n`` with sign ``signs[e]``."""
        n = xs.size
        if self.mu_bit is None:
            mu = np.zeros(n, dtype=np.int64)
        else:
            mu = (xs >> self.mu_bit) & 1
        cols, signs = [], []
        for vmap, table, off, srcs, sign in self.gathers:
            pos = table.lookup(_kernels.gather_bits(xs, vmap))
            for i in srcs:
                cols.append(table.ids[pos, i] + off)
                signs.append(sign)
        if cols:
            cmat = np.stack(cols, axis=1)
        else:
            cmat = np.zeros((n, 0), dtype=np.int64)
        return mu, cmat, np.array(signs, dtype=np.int64)


def _row_keys(mu, cols, signs) -> tuple[np.ndarray, int]:
    """Order-free row key ``[mu, sorted received ids, sorted sent ids]`` and the received count."""
    pos = np.sort(cols[:, signs > 0], axis=1)
    neg = np.sort(cols[:, signs < 0], axis=1)
    key = np.concatenate([mu[:, None], pos, neg], axis=1).astype(np.int32)
    return key, pos.shape[1]


def _unique_rows(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if mat.shape[0] == 0:
        return mat, np.zeros(0, dtype=np.int64)
    u, first = np.unique(mat, axis=0, return_index=True)
    return u, first


def build_lp(
    g: GridModel | str,
    variant: Variant | str,
    rules: Sequence[Rule],
    dedupe: bool = False,
    merge_rows: bool = True,
    chunk: int = 1 << 19,
    progress: Callable[[str], None] | None = None,
) -> LinearProgram:
    """Assemble the program for ``rules`` on codes of type ``variant``.

    ``dedupe`` keeps one realization per orbit of the symmetries of each
    constraint configuration; ``merge_rows`` drops repeated rows.  Neither
    changes the optimum.  Output is deterministic for fixed inputs.
    """
    g = get_grid(g)
    variant = Variant.parse(variant)
    rules = tuple(rules)
    if not rules:
        raise ValueError("at least one rule is required")
    names = [r.name for r in rules]
    if len(set(names)) != len(names):
        raise ValueError(f"rule names must be distinct: {names}")
    for r in rules:
        if r.grid.kind != g.kind:
            raise ValueError(f"rule {r.name} is for the {r.grid.kind} grid, not {g.kind}")
    family = forbidden_family(g, variant)
    say = progress or (lambda msg: None)

    tables: list[VariableTable] = []
    offsets = []
    total = 1
    for r in rules:
        t = allocate_variables(r, family)
        tables.append(t)
        offsets.append(total)
        total += len(t)
    if total >= 2**31:
        raise ValueError("too many candidate variables")
    say(f"allocated {total - 1} candidate variables")

    blocks = []
    centers = []
    stats = {"realizations": [], "rows_before_merge": 0}
    for ci, center in enumerate(orbit_representatives(g)):
        cc = constraint_configuration(g, rules, center)
        centers.append(cc)
        m0, m1 = forbidden_masks(g, family, cc.index)
        xs = enumerate_assignments(len(cc.vertices), m0, m1)
        stats["realizations"].append(int(xs.size))
        if dedupe and xs.size:
            xs = _orbit_minima(g, cc, xs)
        say(f"center {center}: {len(cc.vertices)} vertices, {len(cc.contributions)} embeddings, {xs.size} realizations")
        rows_of = _CenterRows(g, rules, tables, offsets, cc)
        keys, reals = [], []
        for lo in range(0, xs.size, chunk):
            part = xs[lo : lo + chunk]
            key, npos = _row_keys(*rows_of.terms(part))
            if merge_rows:
                key, first = _unique_rows(key)
                part = part[first]
            keys.append(key)
            reals.append(part)
        if not keys:
            continue
        key, xs = np.concatenate(keys), np.concatenate(reals)
        del keys, reals
        if merge_rows:
            key, first = _unique_rows(key)
            xs = xs[first]
        blocks.append((ci, isinstance(center, Vertex), key, npos, xs))
        stats["rows_before_merge"] += int(xs.size)

    # sparse assembly; columns still use candidate ids
    row_consts, row_kind, row_center, row_real = [], [], [], []
    coo_r, coo_c, coo_v = [], [], []
    nrow = 0
    for ci, is_vertex, key, npos, xs in blocks:
        n = key.shape[0]
        if n == 0:
            continue
        rows = np.arange(nrow, nrow + n, dtype=np.int64)
        for block, sign in ((key[:, 1 : 1 + npos], 1), (key[:, 1 + npos :], -1)):
            coo_r.append(np.repeat(rows, block.shape[1]))
            coo_c.append(block.ravel().astype(np.int64))
            coo_v.append(np.full(block.size, sign, dtype=np.int64))
        if is_vertex:
            coo_r.append(rows)
            coo_c.append(np.zeros(n, dtype=np.int64))
            coo_v.append(np.full(n, -1, dtype=np.int64))
        row_consts.append(key[:, 0].astype(np.int64))
        row_kind.append(np.full(n, ROW_VERTEX if is_vertex else ROW_FACE, dtype=np.int8))
        row_center.append(np.full(n, ci, dtype=np.int64))
        row_real.append(xs)
        nrow += n
    # cap row
    coo_r.append(np.array([nrow]))
    coo_c.append(np.array([0]))
    coo_v.append(np.array([-1]))
    row_consts.append(np.array([1]))
    row_kind.append(np.array([ROW_CAP], dtype=np.int8))
    row_center.append(np.array([-1]))
    row_real.append(np.array([0]))
    nrow += 1

    A = sp.coo_matrix(
        (np.concatenate(coo_v), (np.concatenate(coo_r), np.concatenate(coo_c))), shape=(nrow, total), dtype=np.int64
    ).tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    const = np.concatenate(row_consts).astype(np.int64)
    kind = np.concatenate(row_kind)
    center_of = np.concatenate(row_center)
    real = np.concatenate(row_real).astype(np.int64)

    # rows whose terms cancelled completely and hold trivially
    nnz = np.diff(A.indptr)
    keep = ~((nnz == 0) & (const >= 0))
    if merge_rows:
        keep &= _first_occurrences(A, const)
    A = A[np.flatnonzero(keep)]
    const, kind, center_of, real = const[keep], kind[keep], center_of[keep], real[keep]

    # compact to variables that occur in some row
    used = np.unique(np.concatenate([[0], A.indices]))
    remap = np.full(total, -1, dtype=np.int64)
    remap[used] = np.arange(used.size)
    A = sp.csr_matrix((A.data, remap[A.indices], A.indptr), shape=(A.shape[0], used.size))
    A.sort_indices()
    all_names = ["w"] + [n for t in tables for n in t.names]
    var_names = [all_names[i] for i in used.tolist()]
    unused = [all_names[i] for i in np.flatnonzero(remap < 0).tolist()]
    stats["rows"] = int(A.shape[0])
    stats["variables"] = len(var_names)
    say(f"program: {A.shape[0]} rows, {len(var_names)} variables")
    return LinearProgram(
        grid=g,
        variant=variant,
        rules=rules,
        var_names=var_names,
        const=const,
        indptr=A.indptr.astype(np.int64),
        indices=A.indices.astype(np.int64),
        data=A.data.astype(np.int64),
        row_kind=kind,
        row_center=center_of,
        row_realization=real,
        centers=centers,
        stats=stats,
        unused=unused,
    )


def _orbit_minima(g, cc: ConstraintConfiguration, xs: np.ndarray) -> np.ndarray:
    index = cc.index
    best = xs.copy()
    for a in stabilizer(g, cc.configuration, fixed=[cc.center]):
        p = np.array([index[g.apply(a, v)] for v in cc.vertices], dtype=np.int64)
        inv = np.empty_like(p)
        inv[p] = np.arange(p.size)
        best = np.minimum(best, _kernels.gather_bits(xs, inv))
    return xs[best == xs]


def _first_occurrences(A: sp.csr_matrix, const: np.ndarray) -> np.ndarray:
    seen = set()
    keep = np.zeros(A.shape[0], dtype=bool)
    ind, dat, ptr = A.indices, A.data, A.indptr
    for r in range(A.shape[0]):
        key = (int(const[r]), ind[ptr[r] : ptr[r + 1]].tobytes(), dat[ptr[r] : ptr[r + 1]].tobytes())
        if key not in seen:
            seen.add(key)
            keep[r] = True
    return keep


# --- export ------------------------------------------------------------------------


def _native(lp: LinearProgram) -> str:
    out = [
        "# exact linear program: maximise w subject to every row",
        f"grid: {lp.grid.kind}",
        f"variant: {lp.variant.value}",
        f"rules: {' '.join(r.name for r in lp.rules)}",
        f"hash: {lp.hash}",
        f"variables: {lp.n_vars}",
    ]
    out += [f"var {j} {name}" for j, name in enumerate(lp.var_names)]
    out.append(f"rows: {lp.n_rows}")
    for r in range(lp.n_rows):
        c, coeffs = lp.row(r)
        terms = " ".join(f"{a:+d}*x{j}" for j, a in coeffs.items())
        out.append(f"row {terms} >= {-c}")
    out.append("maximize: x0")
    return "\n".join(out) + "\n"


def _lp_name(j: int) -> str:
    return "w" if j == 0 else f"s{j}"


def _solver_text(lp: LinearProgram) -> str:
    out = ["\\ maximise the vertex charge bound w", "\\ " + f"grid {lp.grid.kind}, variant {lp.variant.value}"]
    out += [f"\\ {_lp_name(j)} = {name}" for j, name in enumerate(lp.var_names)]
    out += ["Maximize", " obj: w", "Subject To"]
    for r in range(lp.n_rows):
        c, coeffs = lp.row(r)
        terms = [f"{'+' if a > 0 else '-'} {abs(a)} {_lp_name(j)}" for j, a in coeffs.items()]
        if not terms:
            terms = ["0 w"]
        lines = [" ".join(terms[k : k + 8]) for k in range(0, len(terms), 8)]
        out.append(f" r{r}: " + "\n   ".join(lines) + f" >= {-c}")
    out.append("Bounds")
    out += [f" {_lp_name(j)} free" for j in range(lp.n_vars)]
    out.append("End")
    return "\n".join(out) + "\n"


def export_lp(lp: LinearProgram, fmt: str = "native_exact") -> str:
    """Serialise ``lp`` as ``native_exact`` (integer rows, reparseable) or ``solver_text`` (CPLEX LP)."""
    if fmt == "native_exact":
        return _native(lp)
    if fmt == "solver_text":
        return _solver_text(lp)
    raise ValueError(f"unknown export format {fmt!r}")


_TERM = re.compile(r"^([+-]\d+)\*x(\d+)$")


@dataclass
class NativeLP:
    grid: str
    variant: str
    rules: list[str]
    hash: str
    var_names: list[str]
    rows: list[tuple[dict[int, int], int]]


def parse_native_lp(text: str) -> NativeLP:
    """Parse ``native_exact`` output; each row is ``(coefficients, rhs)`` meaning ``a . x >= rhs``."""
    head = {}
    names: list[str] = []
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("var "):
            parts = line.split(maxsplit=2)
            if len(parts) != 3 or int(parts[1]) != len(names):
                raise LPFormatError(f"line {lineno}: bad variable record")
            names.append(parts[2])
        elif line.startswith("row "):
            body, sep, rhs = line[3:].rpartition(">=")
            if not sep:
                raise LPFormatError(f"line {lineno}: row without '>='")
            coeffs = {}
            for tok in body.split():
                m = _TERM.match(tok)
                if not m:
                    raise LPFormatError(f"line {lineno}: bad term {tok!r}")
                coeffs[int(m.group(2))] = int(m.group(1))
            rows.append((coeffs, int(rhs)))
        elif ":" in line:
            k, _, v = line.partition(":")
            head[k.strip()] = v.strip()
        else:
            raise LPFormatError(f"line {lineno}: unrecognised line")
    try:
        nv, nr = int(head["variables"]), int(head["rows"])
    except (KeyError, ValueError):
        raise LPFormatError("missing 'variables:' or 'rows:' header") from None
    if nv != len(names) or nr != len(rows):
        raise LPFormatError("header counts do not match the body")
    return NativeLP(head.get("grid", ""), head.get("variant", ""), head.get("rules", "").split(), head.get("hash", ""), names, rows)


class RowEvaluator:
    """Evaluates the row of any object under a labelling of the whole grid.

    The object is moved onto its orbit representative and the labelling
    read off the representative's constraint configuration, exactly as the
    program's rows are built.
    """

    def __init__(self, g: GridModel | str, variant: Variant | str, rules: Sequence[Rule]):
        self.grid = g = get_grid(g)
        self.rules = tuple(rules)
        family = forbidden_family(g, variant)
        self.tables = [allocate_variables(r, family) for r in self.rules]
        self.offsets = []
        total = 1
        for t in self.tables:
            self.offsets.append(total)
            total += len(t)
        self.names = ["w"] + [n for t in self.tables for n in t.names]
        self.centers = []
        for center in orbit_representatives(g):
            cc = constraint_configuration(g, self.rules, center)
            self.centers.append((cc, _CenterRows(g, self.rules, self.tables, self.offsets, cc)))

    def realization(self, obj: Chargeable, member) -> tuple[ConstraintConfiguration, _CenterRows, int]:
        g = self.grid
        for cc, rows in self.centers:
            if type(cc.center) is type(obj):
                found = g.automorphisms_onto(cc.center, obj)
                if found:
                    a = found[0]
                    x = sum(1 << k for k, v in enumerate(cc.vertices) if member(g.apply(a, v)))
                    return cc, rows, x
        raise ValueError(f"no representative for {obj}")

    def net_charge(self, obj: Chargeable, member, sigma: dict[str, Fraction]) -> Fraction:
        """Received minus sent charge at ``obj``; ``sigma`` maps variable names to values."""
        _, rows, x = self.realization(obj, member)
        _, cols, signs = rows.terms(np.array([x], dtype=np.int64))
        return sum((int(s) * sigma[self.names[int(c)]] for c, s in zip(cols[0], signs)), Fraction(0))
