from collections import deque
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcharge.grid import GRID_KINDS, Automorphism, Face, Vertex, get_grid

DEGREE = {"hexagonal": 3, "square": 4, "triangular": 6}
FACE_SIZE = {"hexagonal": 6, "square": 4, "triangular": 3}


def bfs_distance(g, u, v, limit=12):
    seen = {u: 0}
    q = deque([u])
    while q:
        a = q.popleft()
        if a == v:
            return seen[a]
        if seen[a] >= limit:
            continue
        for b in g.neighbors(a):
            if b not in seen:
                seen[b] = seen[a] + 1
                q.append(b)
    raise AssertionError("too far")


def test_get_grid_aliases():
    assert get_grid("hex").kind == "hexagonal"
    assert get_grid("SQUARE").kind == "square"
    assert get_grid("tri").kind == "triangular"
    with pytest.raises((KeyError, ValueError)):
        get_grid("pentagonal")


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_degrees_and_face_sizes(kind):
    g = get_grid(kind)
    for v in g.vertices_near([(0, 0), (1, -1)]):
        nb = g.neighbors(v)
        assert len(set(nb)) == DEGREE[kind]
        assert all(v in g.neighbors(w) for w in nb)
        for f in g.incident_faces(v):
            assert v in g.face_vertices(f)
    for f in g.faces_near([(0, 0)]):
        cyc = g.face_vertices(f)
        assert len(cyc) == FACE_SIZE[kind]
        for i, a in enumerate(cyc):
            assert cyc[(i + 1) % len(cyc)] in g.neighbors(a)


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_faces_around_vertex(kind):
    g = get_grid(kind)
    v = g.origin_vertex()
    # each vertex lies on as many faces as it has edges
    assert len(set(g.incident_faces(v))) == DEGREE[kind]


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_adjacent_faces_share_an_edge(kind):
    g = get_grid(kind)
    f = g.origin_face()
    adj = g.adjacent_faces(f)
    assert len(adj) == FACE_SIZE[kind]
    for h in adj:
        assert len(set(g.face_vertices(f)) & set(g.face_vertices(h))) == 2


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_distance_matches_bfs(kind):
    g = get_grid(kind)
    u = g.origin_vertex()
    for v in g.ball(u, 4):
        assert g.distance(u, v) == bfs_distance(g, u, v)


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_ball_growth_and_amenability(kind):
    g = get_grid(kind)
    v = g.origin_vertex()
    sizes = [len(g.ball(v, r)) for r in range(5)]
    assert sizes[0] == 1 and sizes[1] == 1 + DEGREE[kind]
    assert sizes == sorted(sizes)
    assert g.amenability_ratio(v, 20, 2) < g.amenability_ratio(v, 5, 2)
    assert g.amenability_ratio(v, 20, 2) < Fraction(1, 4)


def objects(g):
    return g.vertices_near([(0, 0), (1, 0), (0, 1)]) + g.faces_near([(0, 0), (1, 0), (0, 1)])


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_automorphisms_preserve_adjacency(kind):
    g = get_grid(kind)
    for k in range(g.order):
        a = g.compose(g.translation((2, -1)), g.rotation(k))
        for v in g.vertices_near([(0, 0)]):
            img = g.apply(a, v)
            assert set(g.neighbors(img)) == {g.apply(a, w) for w in g.neighbors(v)}
            assert set(g.incident_faces(img)) == {g.apply(a, f) for f in g.incident_faces(v)}


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_transitive_on_vertices_and_faces(kind):
    g = get_grid(kind)
    for x in objects(g):
        base = g.origin_vertex() if isinstance(x, Vertex) else g.origin_face()
        maps = g.automorphisms_onto(base, x)
        assert maps
        assert all(g.apply(a, base) == x for a in maps)


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_stabilizer_orders(kind):
    g = get_grid(kind)
    assert len(g.rotations_fixing(g.origin_vertex())) == DEGREE[kind]
    assert len(g.rotations_fixing(g.origin_face())) == FACE_SIZE[kind]


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(GRID_KINDS),
    st.integers(0, 5), st.integers(-4, 4), st.integers(-4, 4),
    st.integers(0, 5), st.integers(-4, 4), st.integers(-4, 4),
)
def test_compose_and_inverse(kind, k1, x1, y1, k2, x2, y2):
    g = get_grid(kind)
    a = Automorphism(k1 % g.order, (x1, y1))
    b = Automorphism(k2 % g.order, (x2, y2))
    ab = g.compose(a, b)
    for x in objects(g):
        assert g.apply(ab, x) == g.apply(a, g.apply(b, x))
        assert g.apply(g.inverse(a), g.apply(a, x)) == x


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_object_distance(kind):
    g = get_grid(kind)
    f = g.origin_face()
    for v in g.face_vertices(f):
        assert g.object_distance(v, f) == 0
    for h in g.adjacent_faces(f):
        assert g.object_distance(f, h) == 0


def test_pickle_roundtrip():
    import pickle

    g = get_grid("hex")
    assert pickle.loads(pickle.dumps(g)) is g


def test_vertex_face_are_distinct_types():
    assert Vertex((0, 0)) != Face((0, 0))
