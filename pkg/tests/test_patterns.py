import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import nearby_objects, random_pattern
from gridcharge.config import ConfigFormatError
from gridcharge.grid import GRID_KINDS, Vertex, get_grid
from gridcharge.patterns import (
    PeriodicPattern,
    format_pattern,
    hnf,
    lattices,
    parse_pattern,
    pattern_density,
    pattern_valid,
    pattern_violation,
    search_optimal,
    unroll,
)


def in_lattice(v, basis):
    (p, q), (_, s) = basis
    if v[0] % p:
        return False
    k = v[0] // p
    return (v[1] - k * q) % s == 0


vec = st.tuples(st.integers(-9, 9), st.integers(-9, 9))


@settings(max_examples=200, deadline=None)
@given(vec, vec)
def test_hnf_spans_the_same_lattice(v1, v2):
    det = v1[0] * v2[1] - v1[1] * v2[0]
    if det == 0:
        with pytest.raises(ValueError):
            hnf(v1, v2)
        return
    (p, q), (z, s) = basis = hnf(v1, v2)
    assert z == 0 and p > 0 and s > 0 and 0 <= q < s
    assert p * s == abs(det)
    assert in_lattice(v1, basis) and in_lattice(v2, basis)
    # the basis vectors are integer combinations of v1, v2
    for t in ((p, q), (0, s)):
        a = (t[0] * v2[1] - t[1] * v2[0]) / det
        b = (v1[0] * t[1] - v1[1] * t[0]) / det
        assert a == int(a) and b == int(b)


def divisor_sum(n):
    return sum(d for d in range(1, n + 1) if n % d == 0)


@pytest.mark.parametrize("n", range(1, 13))
def test_lattice_count_is_divisor_sum(n):
    found = list(lattices(n))
    assert len(found) == len(set(found)) == divisor_sum(n)
    assert all(p * s == n and hnf(*b) == b for b in found for (p, _), (_, s) in [b])


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_make_is_independent_of_the_basis(kind):
    g = get_grid(kind)
    elems = [Vertex(v.coords) for v in g.vertices_near([(0, 0)])][:1]
    a = PeriodicPattern.make(g, (2, 1), (0, 3), elems)
    b = PeriodicPattern.make(g, (2, 4), (2, 1), elems)
    assert a == b


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(GRID_KINDS), st.integers(1, 3), st.integers(1, 3), st.integers(0, 10**6))
def test_unroll_preserves_the_set(kind, k1, k2, seed):
    g = get_grid(kind)
    pat = random_pattern(g, random.Random(seed), max_cells=4)
    big = unroll(pat, k1, k2)
    assert big.cells == pat.cells * k1 * k2
    assert pattern_density(big) == pattern_density(pat)
    for v in nearby_objects(g, pat, margin=2):
        if isinstance(v, Vertex):
            assert big.contains(v) == pat.contains(v)


@pytest.mark.parametrize("kind", GRID_KINDS)
@pytest.mark.parametrize("variant", ["dominating", "identifying"])
def test_validity_survives_unrolling(kind, variant):
    rng = random.Random(11)
    g = get_grid(kind)
    for _ in range(8):
        pat = random_pattern(g, rng, max_cells=4)
        assert pattern_valid(pat, variant) == pattern_valid(unroll(pat, 2, 1), variant)


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_translation_invariance(kind):
    rng = random.Random(3)
    g = get_grid(kind)
    pat = random_pattern(g, rng, max_cells=4)
    t = g.translation((1, 2))
    moved = PeriodicPattern.make(g, *pat.period, [g.apply(t, v) for v in pat.elements])
    assert pattern_density(moved) == pattern_density(pat)
    assert pattern_valid(moved, "identifying") == pattern_valid(pat, "identifying")


@pytest.mark.parametrize(
    "kind, max_vertices, want",
    [("hexagonal", 8, Fraction(1, 4)), ("square", 5, Fraction(1, 5)), ("triangular", 7, Fraction(1, 7))],
)
def test_search_finds_optimal_dominating_sets(kind, max_vertices, want):
    res = search_optimal(kind, "dominating", max_vertices)
    assert res.density == want == pattern_density(res.pattern)
    assert pattern_valid(res.pattern, "dominating")
    assert res.lattices_scanned > 0


def test_search_below_the_optimum_returns_the_small_period_best():
    res = search_optimal("square", "dominating", 4)
    assert res.density > Fraction(1, 5)
    assert pattern_valid(res.pattern, "dominating")


def test_search_rejects_huge_domains():
    with pytest.raises(ValueError):
        search_optimal("square", "dominating", 63)


def test_violation_reports_a_forbidden_copy():
    g = get_grid("square")
    empty = PeriodicPattern.make(g, (1, 0), (0, 1), [])
    idx, a = pattern_violation(empty, "dominating")
    assert idx == 0 and a is not None


@pytest.mark.parametrize("kind", GRID_KINDS)
def test_format_parse_roundtrip(kind):
    pat = random_pattern(get_grid(kind), random.Random(5))
    text = format_pattern(pat)
    assert parse_pattern(text) == pat
    assert format_pattern(parse_pattern(text)) == text


@pytest.mark.parametrize(
    "text",
    [
        "period: 1 0 / 0 1\n",
        "grid: square\n",
        "grid: square\nperiod: 1 0 0\n",
        "grid: square\nperiod: 1 0 / 2 0\n",
        "grid: square\nperiod: a 0 / 0 1\n",
        "element: 0 0\n",
        "grid: square\nperiod: 1 0 / 0 1\ncolour: red\n",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ConfigFormatError):
        parse_pattern(text)


def test_stored_hexagonal_identifying_code():
    from pathlib import Path

    path = Path(__file__).resolve().parent.parent / "patterns" / "hex_identifying_3_7.pattern"
    pat = parse_pattern(path.read_text())
    assert pattern_valid(pat, "identifying")
    assert pattern_density(pat) == Fraction(3, 7)
    assert search_optimal("hexagonal", "identifying", 14).density == Fraction(3, 7)
