"""Integer-coordinate models of the hexagonal, square and triangular grids.

Coordinates
-----------
square
    ``Vertex((x, y))``; ``Face((x, y))`` is the unit square whose lower-left
    corner is vertex ``(x, y)``.
triangular
    ``Vertex((x, y))`` is the lattice point ``x*e1 + y*e2`` with ``e1, e2`` at
    60 degrees.  ``Face((x, y, o))`` is the up (``o = 0``) or down (``o = 1``)
    triangle of lattice cell ``(x, y)``.
hexagonal
    The dual of the triangular grid.  ``Face((q, r))`` is a hexagon centred on
    a lattice point and ``Vertex((q, r, k))`` is the centre of the up/down
    triangle ``k`` of cell ``(q, r)``.

Every automorphism is ``x -> R**k x + t`` where ``R`` is the generating
rotation about the origin (60 degrees about a vertex of the triangular grid,
about a face of the hexagonal grid, 90 degrees about a vertex of the square
grid) and ``t`` an integer lattice vector.  Reflections are never produced.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

__all__ = [
    "Vertex",
    "Face",
    "Automorphism",
    "GridModel",
    "get_grid",
    "GRID_KINDS",
]


@dataclass(frozen=True, order=True)
class Vertex:
    coords: tuple[int, ...]

    @property
    def cell(self) -> tuple[int, int]:
        return self.coords[0], self.coords[1]

    def __repr__(self) -> str:
        return "V" + repr(self.coords)


@dataclass(frozen=True, order=True)
class Face:
    coords: tuple[int, ...]

    @property
    def cell(self) -> tuple[int, int]:
        return self.coords[0], self.coords[1]

    def __repr__(self) -> str:
        return "F" + repr(self.coords)


Chargeable = Union[Vertex, Face]

GRID_KINDS = ("hexagonal", "square", "triangular")
_ALIASES = {
    "hex": "hexagonal",
    "hexagonal": "hexagonal",
    "sq": "square",
    "square": "square",
    "tri": "triangular",
    "triangular": "triangular",
}


def _translate(x: Chargeable, t: tuple[int, int]) -> Chargeable:
    c = x.coords
    return type(x)((c[0] + t[0], c[1] + t[1]) + c[2:])


# Up/down lattice triangles under the 60 degree rotation (a, b) -> (-b, a + b).
def _rot_triangle(c: tuple[int, ...]) -> tuple[int, ...]:
    x, y, o = c
    if o == 0:
        return (-y - 1, x + y, 1)
    return (-y - 1, x + y + 1, 0)


@dataclass(frozen=True)
class Automorphism:
    """``x -> R**rot x + shift`` for the grid's generating rotation ``R``."""

    rot: int
    shift: tuple[int, int]


class GridModel:
    """Base class; use :func:`get_grid` to obtain an instance."""

    kind: str = ""
    degree: int = 0
    face_size: int = 0
    order: int = 0  # order of the point group R
    lattice_basis = ((1, 0), (0, 1))
    rotation_catalog: tuple[tuple[str, int], ...] = ()

    def __repr__(self) -> str:
        return f"<GridModel {self.kind}>"

    def __reduce__(self):
        return (get_grid, (self.kind,))

    # --- incidence -------------------------------------------------------

    def origin_vertex(self) -> Vertex:
        raise NotImplementedError

    def origin_face(self) -> Face:
        raise NotImplementedError

    def neighbors(self, v: Vertex) -> tuple[Vertex, ...]:
        raise NotImplementedError

    def incident_faces(self, v: Vertex) -> tuple[Face, ...]:
        """Faces around ``v`` in counterclockwise order."""
        raise NotImplementedError

    def face_vertices(self, f: Face) -> tuple[Vertex, ...]:
        """Boundary cycle of ``f`` in counterclockwise order."""
        raise NotImplementedError

    def adjacent_faces(self, f: Face) -> tuple[Face, ...]:
        """Faces sharing an edge with ``f``, counterclockwise.

        The i-th entry lies across the edge between the i-th and (i+1)-th
        boundary vertices of ``f``.
        """
        cyc = self.face_vertices(f)
        out = []
        for i, a in enumerate(cyc):
            b = cyc[(i + 1) % len(cyc)]
            (g,) = [h for h in self.incident_faces(a) if h != f and b in self.face_vertices(h)]
            out.append(g)
        return tuple(out)

    # --- symmetry --------------------------------------------------------

    def rotate_vector(self, t: tuple[int, int]) -> tuple[int, int]:
        raise NotImplementedError

    def _rotate_once(self, x: Chargeable) -> Chargeable:
        raise NotImplementedError

    def rotate(self, x: Chargeable, k: int = 1) -> Chargeable:
        for _ in range(k % self.order):
            x = self._rotate_once(x)
        return x

    def identity(self) -> Automorphism:
        return Automorphism(0, (0, 0))

    def translation(self, t: tuple[int, int]) -> Automorphism:
        return Automorphism(0, (int(t[0]), int(t[1])))

    def rotation(self, k: int) -> Automorphism:
        return Automorphism(k % self.order, (0, 0))

    def compose(self, a: Automorphism, b: Automorphism) -> Automorphism:
        """``a o b``: apply ``b`` first."""
        t = b.shift
        for _ in range(a.rot):
            t = self.rotate_vector(t)
        return Automorphism((a.rot + b.rot) % self.order, (t[0] + a.shift[0], t[1] + a.shift[1]))

    def inverse(self, a: Automorphism) -> Automorphism:
        k = (-a.rot) % self.order
        t = (-a.shift[0], -a.shift[1])
        for _ in range(k):
            t = self.rotate_vector(t)
        return Automorphism(k, t)

    def apply(self, a: Automorphism, x):
        """Image of a vertex, face, iterable of those, or a Configuration."""
        if isinstance(x, (Vertex, Face)):
            return _translate(self.rotate(x, a.rot), a.shift)
        if hasattr(x, "map_objects"):
            return x.map_objects(lambda y: self.apply(a, y))
        return type(x)(self.apply(a, y) for y in x)

    def class_of(self, x: Chargeable) -> tuple[int, ...]:
        """Sublattice label of ``x``; translations preserve it."""
        return x.coords[2:]

    def mapping_onto(self, x: Chargeable, y: Chargeable, k: int) -> Automorphism | None:
        """The automorphism with rotation part ``k`` sending ``x`` to ``y``."""
        if type(x) is not type(y):
            return None
        rx = self.rotate(x, k)
        if self.class_of(rx) != self.class_of(y):
            return None
        return Automorphism(k % self.order, (y.coords[0] - rx.coords[0], y.coords[1] - rx.coords[1]))

    def automorphisms_onto(self, x: Chargeable, y: Chargeable) -> list[Automorphism]:
        out = []
        for k in range(self.order):
            a = self.mapping_onto(x, y, k)
            if a is not None:
                out.append(a)
        return out

    def rotations_fixing(self, x: Chargeable) -> list[Automorphism]:
        return self.automorphisms_onto(x, x)

    # --- metric ----------------------------------------------------------

    def distance(self, u: Vertex, v: Vertex) -> int:
        return _distance(self.kind, _rel(u, v))

    def ball(self, x: Chargeable, r: int) -> frozenset[Vertex]:
        """``B_r``.  For a face, the vertices within ``r`` of its boundary."""
        if r < 0:
            raise ValueError("radius must be nonnegative")
        seeds = [x] if isinstance(x, Vertex) else list(self.face_vertices(x))
        seen = set(seeds)
        frontier = list(seeds)
        for _ in range(r):
            nxt = []
            for u in frontier:
                for w in self.neighbors(u):
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        return frozenset(seen)

    def face_ball(self, x: Chargeable, r: int) -> frozenset[Face]:
        """``F_r``: faces incident to a vertex of ``B_{r-1}(x)``."""
        if r < 1:
            raise ValueError("face ball radius must be at least 1")
        return frozenset(f for v in self.ball(x, r - 1) for f in self.incident_faces(v))

    def object_distance(self, x: Chargeable, y: Chargeable) -> int:
        """Least vertex distance between the boundaries of two objects."""
        xs = [x] if isinstance(x, Vertex) else self.face_vertices(x)
        ys = [y] if isinstance(y, Vertex) else self.face_vertices(y)
        return min(self.distance(a, b) for a in xs for b in ys)

    def amenability_ratio(self, v: Vertex, r: int, d: int) -> Fraction:
        if r < 1:
            raise ValueError("r must be positive")
        inner = self.ball(v, r)
        outer = self.ball(v, r + d)
        return Fraction(len(outer - inner), len(inner))

    # --- windows ---------------------------------------------------------

    def vertices_near(self, cells: Iterable[tuple[int, int]]) -> list[Vertex]:
        raise NotImplementedError

    def faces_near(self, cells: Iterable[tuple[int, int]]) -> list[Face]:
        raise NotImplementedError

    def vertex_classes(self) -> tuple[tuple[int, ...], ...]:
        raise NotImplementedError

    def face_classes(self) -> tuple[tuple[int, ...], ...]:
        raise NotImplementedError


class SquareGrid(GridModel):
    kind = "square"
    degree = 4
    face_size = 4
    order = 4
    rotation_catalog = (("vertex", 4), ("face", 4), ("edge", 2))

    def origin_vertex(self):
        return Vertex((0, 0))

    def origin_face(self):
        return Face((0, 0))

    def neighbors(self, v):
        x, y = v.coords
        return (Vertex((x + 1, y)), Vertex((x, y + 1)), Vertex((x - 1, y)), Vertex((x, y - 1)))

    def incident_faces(self, v):
        x, y = v.coords
        return (Face((x, y)), Face((x - 1, y)), Face((x - 1, y - 1)), Face((x, y - 1)))

    def face_vertices(self, f):
        x, y = f.coords
        return (Vertex((x, y)), Vertex((x + 1, y)), Vertex((x + 1, y + 1)), Vertex((x, y + 1)))

    def rotate_vector(self, t):
        return (-t[1], t[0])

    def _rotate_once(self, x):
        a, b = x.coords
        if isinstance(x, Vertex):
            return Vertex((-b, a))
        return Face((-b - 1, a))

    def vertex_classes(self):
        return ((),)

    def face_classes(self):
        return ((),)


class TriangularGrid(GridModel):
    kind = "triangular"
    degree = 6
    face_size = 3
    order = 6
    rotation_catalog = (("vertex", 6), ("face", 3), ("edge", 2))

    def origin_vertex(self):
        return Vertex((0, 0))

    def origin_face(self):
        return Face((0, 0, 0))

    def neighbors(self, v):
        x, y = v.coords
        return (
            Vertex((x + 1, y)),
            Vertex((x, y + 1)),
            Vertex((x - 1, y + 1)),
            Vertex((x - 1, y)),
            Vertex((x, y - 1)),
            Vertex((x + 1, y - 1)),
        )

    def incident_faces(self, v):
        x, y = v.coords
        return (
            Face((x, y, 0)),
            Face((x - 1, y, 1)),
            Face((x - 1, y, 0)),
            Face((x - 1, y - 1, 1)),
            Face((x, y - 1, 0)),
            Face((x, y - 1, 1)),
        )

    def face_vertices(self, f):
        x, y, o = f.coords
        if o == 0:
            return (Vertex((x, y)), Vertex((x + 1, y)), Vertex((x, y + 1)))
        return (Vertex((x + 1, y)), Vertex((x + 1, y + 1)), Vertex((x, y + 1)))

    def rotate_vector(self, t):
        return (-t[1], t[0] + t[1])

    def _rotate_once(self, x):
        if isinstance(x, Vertex):
            return Vertex(self.rotate_vector(x.coords))
        return Face(_rot_triangle(x.coords))

    def vertex_classes(self):
        return ((),)

    def face_classes(self):
        return ((0,), (1,))


class HexagonalGrid(GridModel):
    kind = "hexagonal"
    degree = 3
    face_size = 6
    order = 6
    rotation_catalog = (("face", 6), ("vertex", 3), ("edge", 2))

    def origin_vertex(self):
        return Vertex((0, 0, 0))

    def origin_face(self):
        return Face((0, 0))

    def neighbors(self, v):
        q, r, k = v.coords
        if k == 0:
            return (Vertex((q, r, 1)), Vertex((q - 1, r, 1)), Vertex((q, r - 1, 1)))
        return (Vertex((q, r, 0)), Vertex((q + 1, r, 0)), Vertex((q, r + 1, 0)))

    def incident_faces(self, v):
        q, r, k = v.coords
        if k == 0:
            return (Face((q, r)), Face((q + 1, r)), Face((q, r + 1)))
        return (Face((q + 1, r)), Face((q + 1, r + 1)), Face((q, r + 1)))

    def face_vertices(self, f):
        q, r = f.coords
        return (
            Vertex((q, r, 0)),
            Vertex((q - 1, r, 1)),
            Vertex((q - 1, r, 0)),
            Vertex((q - 1, r - 1, 1)),
            Vertex((q, r - 1, 0)),
            Vertex((q, r - 1, 1)),
        )

    def rotate_vector(self, t):
        return (-t[1], t[0] + t[1])

    def _rotate_once(self, x):
        if isinstance(x, Face):
            return Face(self.rotate_vector(x.coords))
        return Vertex(_rot_triangle(x.coords))

    def vertex_classes(self):
        return ((0,), (1,))

    def face_classes(self):
        return ((),)


def _cells_objects(cls, classes, cells):
    return [cls(tuple(c) + k) for c in cells for k in classes]


for _g in (SquareGrid, TriangularGrid, HexagonalGrid):
    _g.vertices_near = lambda self, cells: _cells_objects(Vertex, self.vertex_classes(), cells)
    _g.faces_near = lambda self, cells: _cells_objects(Face, self.face_classes(), cells)

_GRIDS = {"square": SquareGrid(), "triangular": TriangularGrid(), "hexagonal": HexagonalGrid()}


def get_grid(kind: str | GridModel) -> GridModel:
    """Return the shared model for ``kind`` (``hex``, ``square``, ``tri`` or full names)."""
    if isinstance(kind, GridModel):
        return kind
    try:
        return _GRIDS[_ALIASES[kind.lower()]]
    except KeyError:
        raise ValueError(f"unknown grid {kind!r}; expected one of {GRID_KINDS}") from None


def _rel(u: Vertex, v: Vertex) -> tuple:
    # distances are translation invariant: move u's cell to the origin
    du, dv = u.coords, v.coords
    return (du[2:], (dv[0] - du[0], dv[1] - du[1]) + dv[2:])


@lru_cache(maxsize=1 << 16)
def _distance(kind: str, rel: tuple) -> int:
    g = _GRIDS[kind]
    src = Vertex((0, 0) + rel[0])
    dst = Vertex(rel[1])
    if src == dst:
        return 0
    # breadth-first search; configurations in scope have small diameter
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for w in g.neighbors(u):
            if w not in dist:
                if w == dst:
                    return dist[u] + 1
                dist[w] = dist[u] + 1
                q.append(w)
    raise AssertionError("grid is connected")
