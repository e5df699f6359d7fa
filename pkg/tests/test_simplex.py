import random
from fractions import Fraction

import numpy as np
import pytest
import scipy.optimize
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcharge.grid import get_grid
from gridcharge.lp import ROW_CAP, ROW_VERTEX, LinearProgram, build_lp
from gridcharge.codes import Variant
from gridcharge.rules import builtin_rule
from gridcharge.simplex import (
    Certificate,
    CertificateFormatError,
    SingularBasis,
    SparseLU,
    certificate_from,
    format_certificate,
    lower_bound,
    parse_certificate,
    solve_exact,
)


def gauss_solve(M, b):
    n = len(M)
    A = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c] / A[c][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return [A[i][n] / A[i][i] for i in range(n)]


def random_nonsingular(rng, n, density=0.4):
    while True:
        M = [[rng.randint(-3, 3) if rng.random() < density else 0 for _ in range(n)] for _ in range(n)]
        for i in range(n):
            M[i][i] = M[i][i] or rng.choice([-2, -1, 1, 2])
        if round(np.linalg.det(np.array(M, dtype=float))) != 0:
            return M


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(0, 10**6))
def test_sparse_lu_matches_gaussian_elimination(n, seed):
    rng = random.Random(seed)
    M = random_nonsingular(rng, n)
    b = [rng.randint(-5, 5) for _ in range(n)]
    cols = [{i: Fraction(M[i][j]) for i in range(n) if M[i][j]} for j in range(n)]
    lu = SparseLU(cols, n)
    x = lu.solve({i: Fraction(v) for i, v in enumerate(b) if v})
    want = gauss_solve(M, b)
    assert [Fraction(x.get(i, 0)) for i in range(n)] == want
    MT = [list(r) for r in zip(*M)]
    y = lu.solve_transpose({i: Fraction(v) for i, v in enumerate(b) if v})
    assert [Fraction(y.get(i, 0)) for i in range(n)] == gauss_solve(MT, b)


def test_sparse_lu_singular():
    cols = [{0: Fraction(1), 1: Fraction(2)}, {0: Fraction(2), 1: Fraction(4)}]
    with pytest.raises(SingularBasis):
        SparseLU(cols, 2)


def make_lp(const, A):
    """A program over x = (w, s_1, ...) from integer rows ``const + A x >= 0`` plus the cap row."""
    const = np.array(list(const) + [1], dtype=np.int64)
    rows = [list(r) for r in A] + [[-1] + [0] * (len(A[0]) - 1)]
    M = sp.csr_matrix(np.array(rows, dtype=np.int64))
    kinds = np.array([ROW_VERTEX] * len(A) + [ROW_CAP], dtype=np.int8)
    return LinearProgram(
        grid=get_grid("square"),
        variant=Variant.dominating,
        rules=(builtin_rule("square", "V1"),),
        var_names=["w"] + [f"s{j}" for j in range(1, M.shape[1])],
        const=const,
        indptr=M.indptr.astype(np.int64),
        indices=M.indices.astype(np.int64),
        data=M.data.astype(np.int64),
        row_kind=kinds,
        row_center=np.zeros(len(kinds), dtype=np.int64),
        row_realization=np.zeros(len(kinds), dtype=np.int64),
        centers=[],
    )


def random_lp(rng, m, n):
    const = [rng.randint(0, 3) for _ in range(m)]
    A = [[rng.choice([-1, 0, 0])] + [rng.randint(-2, 2) for _ in range(n - 1)] for _ in range(m)]
    return make_lp(const, A)


def scipy_optimum(lp):
    A = lp.matrix().toarray().astype(float)
    c = np.zeros(lp.n_vars)
    c[0] = -1
    res = scipy.optimize.linprog(c, A_ub=-A, b_ub=lp.const.astype(float), bounds=[(None, None)] * lp.n_vars, method="highs")
    assert res.status == 0
    return -res.fun


def check_optimality(lp, res):
    slack = lp.slacks(res.x)
    assert min(slack) >= 0
    # dual feasibility and zero duality gap, exactly
    assert all(v > 0 for v in res.dual.values())
    total = [Fraction(0)] * lp.n_vars
    for r, y in res.dual.items():
        _, coeffs = lp.row(r)
        for j, a in coeffs.items():
            total[j] -= a * y
    assert total == [Fraction(1)] + [Fraction(0)] * (lp.n_vars - 1)
    assert sum(lp.const[r] * y for r, y in res.dual.items()) == res.w


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 14), st.integers(2, 6), st.integers(0, 10**6), st.booleans())
def test_solve_exact_on_random_programs(m, n, seed, warm):
    lp = random_lp(random.Random(seed), m, n)
    res = solve_exact(lp, warm_start=warm)
    assert abs(float(res.w) - scipy_optimum(lp)) < 1e-9
    check_optimality(lp, res)


def test_cap_bound_status():
    lp = make_lp([5], [[-1, 0]])
    res = solve_exact(lp)
    assert res.w == 1 and res.status == "cap_bound"


@pytest.mark.parametrize("kind, variant, want", [("hex", "identifying", Fraction(2, 5)), ("square", "identifying", Fraction(3, 10))])
def test_warm_and_cold_agree(kind, variant, want):
    lp = build_lp(kind, variant, [builtin_rule(kind, "V1")], dedupe=True)
    warm = solve_exact(lp, warm_start=True)
    cold = solve_exact(lp, warm_start=False)
    assert warm.w == cold.w == want
    assert warm.warm_start_used and not cold.warm_start_used
    check_optimality(lp, warm)
    check_optimality(lp, cold)


def test_iteration_limit():
    lp = build_lp("hex", "identifying", [builtin_rule("hex", "V1")])
    with pytest.raises(RuntimeError):
        solve_exact(lp, warm_start=False, max_iterations=1)


def test_lower_bound():
    assert lower_bound("triangular", "dominating", [builtin_rule("triangular", "V1")]) == Fraction(1, 7)


def test_certificate_roundtrip():
    lp = build_lp("hex", "dominating", [builtin_rule("hex", "V1")])
    cert = certificate_from(lp, solve_exact(lp))
    text = format_certificate(cert)
    back = parse_certificate(text)
    assert back == cert
    assert format_certificate(back) == text
    assert cert.d == 0 and cert.c == max(abs(v) for v in cert.sigma.values())


@pytest.mark.parametrize(
    "text",
    [
        "grid: hexagonal\n",
        "grid: hexagonal\nvariant: dominating\nhash: x\nw: 1/0\n",
        "grid: hexagonal\nvariant: dominating\nhash: x\nw: 1/4\nsigma a: b\n",
        "grid: hexagonal\nvariant: dominating\nhash: x\nw: 1/4\nsigma a: 1\nsigma a: 2\n",
        "grid: hexagonal\ngrid: square\n",
        "grid: hexagonal\nvariant: dominating\nhash: x\nw: 1/4\ncolour: red\n",
        "no separator\n",
    ],
)
def test_certificate_parse_errors(text):
    with pytest.raises(CertificateFormatError):
        parse_certificate(text)


def test_certificate_is_dataclass():
    c = Certificate("square", "dominating", "h", Fraction(1, 5), {}, Fraction(0), 0)
    assert parse_certificate(format_certificate(c)) == c


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 14), st.integers(2, 6), st.integers(0, 10**6))
def test_interior_front_end_on_random_programs(m, n, seed):
    lp = random_lp(random.Random(seed), m, n)
    res = solve_exact(lp, method="interior")
    assert abs(float(res.w) - scipy_optimum(lp)) < 1e-9
    check_optimality(lp, res)


@pytest.mark.parametrize("kind, variant, want", [("hex", "identifying", Fraction(2, 5)), ("triangular", "dominating", Fraction(1, 7))])
def test_interior_front_end_is_used(kind, variant, want):
    lp = build_lp(kind, variant, [builtin_rule(kind, "V1")], dedupe=True)
    res = solve_exact(lp, method="interior")
    assert res.w == want and "tight_rows" in res.stats
    assert res.stats["tight_rows"] < lp.n_rows
    check_optimality(lp, res)


def test_unknown_method():
    lp = make_lp([1], [[-1, 0]])
    with pytest.raises(ValueError):
        solve_exact(lp, method="barrier")


def test_restrict_keeps_chosen_rows():
    lp = build_lp("hex", "dominating", [builtin_rule("hex", "V1")])
    rows = [0, 5, lp.n_rows - 1]
    sub = lp.restrict(rows)
    assert sub.n_rows == 3 and sub.var_names == lp.var_names
    assert [sub.row(i) for i in range(3)] == [lp.row(r) for r in rows]
