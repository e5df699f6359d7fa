"""Exact optimisation of the discharging program and certificates.

The program P (maximise ``w`` subject to ``const + A x >= 0``, ``x`` free)
is solved through its dual D::

    minimise  sum_r const_r y_r   subject to   sum_r (-a_r) y_r = e_w,  y >= 0.

For large programs an interior-point method locates the optimal face of P;
the rows tight there form a small program solved exactly below, and an
exact point on that face is built by rounding and elimination.  Otherwise
a floating-point HiGHS solve of D by column generation proposes a
basis; it is then checked with exact rationals.  If the check fails, an exact revised simplex with
Bland's rule runs on D, starting from that basis when it is usable and
from the cap column otherwise.  Free P variables that are nonbasic appear
in D as artificial unit columns fixed at zero.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .lp import ROW_CAP, LinearProgram

try:  # exact rationals in C when available
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

__all__ = ["Certificate", "CertificateFormatError", "SolveResult", "solve_exact", "lower_bound", "format_certificate", "parse_certificate"]

log = logging.getLogger(__name__)

INTERIOR_MIN_ROWS = 200_000
INTERIOR_MAX_VARS = 9_000


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


# --- exact sparse LU ----------------------------------------------------------------


class SingularBasis(ArithmeticError):
    pass


class SparseLU:
    """Exact LU factors of a square matrix given by sparse columns.

    Elimination is right-looking with a Markowitz-style pivot choice
    (shortest row, then shortest column) to limit fill-in.
    """

    def __init__(self, columns: Sequence[dict[int, object]], n: int):
        rows: list[dict[int, object]] = [dict() for _ in range(n)]
        colrows: list[set[int]] = [set() for _ in range(n)]
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    rows[i][j] = v
                    colrows[j].add(i)
        active = set(range(n))
        self.n = n
        self.prow: list[int] = []
        self.pcol: list[int] = []
        self.U: list[dict[int, object]] = []
        self.L: list[list[tuple[int, object]]] = []
        buckets: dict[int, set[int]] = {}
        for i in range(n):
            buckets.setdefault(len(rows[i]), set()).add(i)
        rowlen = [len(r) for r in rows]

        def move(i, new):
            buckets[rowlen[i]].discard(i)
            rowlen[i] = new
            buckets.setdefault(new, set()).add(i)

        for _ in range(n):
            i = None
            for size in sorted(k for k, b in buckets.items() if b):
                if size == 0:
                    raise SingularBasis("basis matrix is singular")
                i = min(buckets[size])
                break
            if i is None:
                raise SingularBasis("basis matrix is singular")
            row = rows[i]
            j = min(row, key=lambda c: (len(colrows[c]), c))
            piv = row[j]
            buckets[rowlen[i]].discard(i)
            active.discard(i)
            lcol = []
            for k in sorted(colrows[j] - {i}):
                rk = rows[k]
                f = rk[j] / piv
                lcol.append((k, f))
                for c, v in row.items():
                    nv = rk.get(c, 0) - f * v
                    if nv:
                        if c not in rk:
                            colrows[c].add(k)
                        rk[c] = nv
                    elif c in rk:
                        del rk[c]
                        colrows[c].discard(k)
                move(k, len(rk))
            for c in row:
                colrows[c].discard(i)
            self.prow.append(i)
            self.pcol.append(j)
            self.U.append(row)
            self.L.append(lcol)
        self.ucols: list[list[tuple[int, object]]] = [[] for _ in range(n)]
        step_of_col = {c: s for s, c in enumerate(self.pcol)}
        for s, row in enumerate(self.U):
            for c, v in row.items():
                if c != self.pcol[s]:
                    self.ucols[step_of_col[c]].append((s, v))

    def solve(self, b: dict[int, object]) -> dict[int, object]:
        """``x`` with ``A x = b``."""
        work = dict(b)
        for s, lcol in enumerate(self.L):
            bi = work.get(self.prow[s], 0)
            if bi:
                for k, f in lcol:
                    work[k] = work.get(k, 0) - f * bi
        x: dict[int, object] = {}
        for s in range(self.n - 1, -1, -1):
            row = self.U[s]
            j = self.pcol[s]
            acc = work.get(self.prow[s], 0)
            for c, v in row.items():
                if c != j and c in x:
                    acc -= v * x[c]
            if acc:
                x[j] = acc / row[j]
        return x

    def solve_transpose(self, c: dict[int, object]) -> dict[int, object]:
        """``y`` with ``A^T y = c``."""
        z: dict[int, object] = {}
        for s in range(self.n):
            j = self.pcol[s]
            acc = c.get(j, 0)
            for t, v in self.ucols[s]:
                zt = z.get(self.prow[t])
                if zt:
                    acc -= zt * v
            if acc:
                z[self.prow[s]] = acc / self.U[s][j]
        for s in range(self.n - 1, -1, -1):
            lcol = self.L[s]
            if lcol:
                acc = 0
                for k, f in lcol:
                    zk = z.get(k)
                    if zk:
                        acc += f * zk
                if acc:
                    p = self.prow[s]
                    nv = z.get(p, 0) - acc
                    if nv:
                        z[p] = nv
                    else:
                        z.pop(p, None)
        return z


class _Basis:
    """Basis inverse as an LU factorisation followed by product-form updates."""

    REFACTOR = 64

    def __init__(self, columns: list[dict[int, object]], n: int):
        self.columns = list(columns)
        self.n = n
        self._factor()

    def _factor(self):
        self.lu = SparseLU(self.columns, self.n)
        self.etas: list[tuple[int, dict[int, object]]] = []

    def solve(self, b):
        x = self.lu.solve(b)
        for p, u in self.etas:
            xp = x.get(p, 0)
            if xp:
                xp = xp / u[p]
                for i, ui in u.items():
                    if i != p:
                        nv = x.get(i, 0) - ui * xp
                        if nv:
                            x[i] = nv
                        else:
                            x.pop(i, None)
                x[p] = xp
            else:
                x.pop(p, None)
        return x

    def solve_transpose(self, c):
        v = dict(c)
        for p, u in reversed(self.etas):
            acc = v.get(p, 0)
            for i, ui in u.items():
                if i != p:
                    vi = v.get(i)
                    if vi:
                        acc -= ui * vi
            acc = acc / u[p]
            if acc:
                v[p] = acc
            else:
                v.pop(p, None)
        return self.lu.solve_transpose(v)

    def replace(self, p: int, column: dict[int, object], u: dict[int, object]):
        self.columns[p] = column
        self.etas.append((p, u))
        if len(self.etas) >= self.REFACTOR:
            self._factor()


# --- the dual problem ------------------------------------------------------------------


class _Dual:
    def __init__(self, lp: LinearProgram):
        self.lp = lp
        self.n = lp.n_vars
        self.m = lp.n_rows
        self.A = lp.matrix().astype(np.int64)
        self.absrow = np.asarray(abs(self.A).sum(axis=1)).ravel()

    def column(self, key) -> dict[int, object]:
        kind, r = key
        if kind == "a":
            return {r: _Q(1)}
        lo, hi = self.lp.indptr[r], self.lp.indptr[r + 1]
        return {int(j): _Q(-int(a)) for j, a in zip(self.lp.indices[lo:hi], self.lp.data[lo:hi])}

    def cost(self, key):
        kind, r = key
        return _Q(0) if kind == "a" else _Q(int(self.lp.const[r]))

    def slacks(self, pi: dict[int, object]) -> tuple[np.ndarray | list, int]:
        """Scaled slacks ``L * (const + A pi)`` and the positive scale ``L``."""
        L = 1
        for v in pi.values():
            L = math.lcm(L, int(v.denominator))
        P = np.zeros(self.n, dtype=object)
        for j, v in pi.items():
            P[j] = int(v.numerator) * (L // int(v.denominator))
        pmax = max((abs(int(p)) for p in P), default=0)
        cmax = int(np.abs(self.lp.const).max()) if self.m else 0
        amax = int(self.absrow.max()) if self.m else 0
        if pmax * amax + L * cmax < 2**62:
            s = self.A @ P.astype(np.int64) + L * self.lp.const
            return s, L
        # scipy.sparse has no object dtype; sum the row products by hand
        prod = self.lp.data.astype(object) * P[self.lp.indices]
        s = L * self.lp.const.astype(object)
        ip = self.lp.indptr
        full = np.flatnonzero(ip[1:] > ip[:-1])
        if full.size:
            s[full] += np.add.reduceat(prod, ip[full])
        return s, L


@dataclass
class SolveResult:
    status: str
    w: Fraction
    x: list[Fraction]
    dual: dict[int, Fraction]
    iterations: int
    warm_start_used: bool
    stats: dict = field(default_factory=dict)


def _warm_basis(
    lp: LinearProgram, say=lambda msg: None, batch: int = 8000, box: float = 2.0, rounds: int = 2000
) -> list | None:
    """Float basis for D from HiGHS by column generation.

    The restricted D has one row per variable of P, so its basis stays
    small however many columns are active.  Columns ``+-e_j`` of cost
    ``box`` bound the rule variables during the search and are switched
    off before the final solve.  Each round prices every P row at the
    current duals and adds the most violated ones.  Only the exact check
    that follows decides optimality, so the tolerances here affect speed
    only.
    """
    try:
        import highspy
    except ImportError:  # pragma: no cover
        return None
    A = lp.matrix().astype(float).tocsr()
    const = lp.const.astype(float)
    n = lp.n_vars
    inf = highspy.kHighsInf
    ok = highspy.HighsModelStatus.kOptimal
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    rhs = np.zeros(n)
    rhs[0] = 1.0
    empty = np.array([], dtype=np.int32)
    h.addRows(n, rhs, rhs, 0, empty, empty, np.array([]))
    nbox = 2 * (n - 1)
    if nbox:
        idx = np.arange(1, n, dtype=np.int32)
        for sign in (1.0, -1.0):
            h.addCols(n - 1, np.full(n - 1, box), np.zeros(n - 1), np.full(n - 1, inf),
                      n - 1, np.arange(n - 1, dtype=np.int32), idx, np.full(n - 1, sign))
    order: list[int] = []

    def add(rows):
        sub = (-A[rows]).tocsr()
        h.addCols(len(rows), const[rows], np.zeros(len(rows)), np.full(len(rows), inf), sub.nnz,
                  sub.indptr[:-1].astype(np.int32), sub.indices.astype(np.int32), sub.data)
        order.extend(int(r) for r in rows)

    def run() -> bool:
        h.run()
        if h.getModelStatus() == ok:
            return True
        # a stale factorisation occasionally stalls HiGHS; one cold retry
        h.clearSolver()
        h.run()
        return h.getModelStatus() == ok

    add(np.flatnonzero(lp.row_kind != 1))
    boxed = nbox > 0
    for rnd in range(rounds):
        if not run():
            say(f"HiGHS stopped with {h.getModelStatus()}")
            return None
        x = np.array(h.getSolution().row_dual)
        slack = A @ x + const
        bad = np.flatnonzero(slack < -1e-9)
        say(f"pricing round {rnd}: w = {x[0]:.6f}, {bad.size} violated rows, {len(order)} active")
        if bad.size == 0:
            if not boxed:
                break
            h.changeColsBounds(nbox, np.arange(nbox, dtype=np.int32), np.zeros(nbox), np.zeros(nbox))
            boxed = False
            continue
        pick = bad[np.argsort(slack[bad], kind="stable")[:batch]]
        add(np.sort(pick))
    else:
        return None
    basis = h.getBasis()
    if not basis.valid:
        return None
    basic = highspy.HighsBasisStatus.kBasic
    keys = [("a", j) for j, st in enumerate(basis.row_status) if st == basic]
    for k, st in enumerate(basis.col_status):
        if st != basic:
            continue
        if k < nbox:
            # box columns sit at zero here and span the same line as an artificial
            keys.append(("a", 1 + k % (n - 1)))
        else:
            keys.append(("r", order[k - nbox]))
    if len(keys) != n or len(set(keys)) != n:
        return None
    return keys


def _interior_point(
    lp: LinearProgram, box: float = 10.0, tol: float = 1e-9, max_iterations: int = 80, say=lambda msg: None
) -> np.ndarray | None:
    """Float optimum of P with ``|x_j| <= box`` by a Mehrotra predictor-corrector method.

    P has directions of recession in the rule variables, so the box is what
    makes the central path well defined.  The normal matrix is dense with
    one row per variable, which is cheap here since variables number in the
    thousands while rows number in the millions.  Near the end the iterates
    approach the relative interior of the optimal face, so the rows that are
    tight at the result are those tight on the whole face.
    """
    import scipy.linalg as la

    A = lp.matrix().astype(float).tocsr()
    AT = A.T.tocsr()
    m, n = A.shape
    c = np.zeros(n)
    c[0] = -1.0
    h = np.concatenate([lp.const.astype(float), np.full(2 * (n - 1), box)])
    N = h.size

    # inequalities G x <= h with G = [-A; I; -I], the identity on x[1:]
    def Gx(x):
        return np.concatenate([-(A @ x), x[1:], -x[1:]])

    def GTz(z):
        out = -(AT @ z[:m])
        out[1:] += z[m : m + n - 1] - z[m + n - 1 :]
        return out

    def step(v, dv):
        neg = dv < 0
        return min(1.0, float((-v[neg] / dv[neg]).min())) if neg.any() else 1.0

    x = np.zeros(n)
    s = np.maximum(h - Gx(x), 1.0)
    z = np.ones(N)
    diag = np.arange(1, n)
    best = None
    for it in range(max_iterations):
        rp = Gx(x) + s - h
        rd = GTz(z) + c
        mu = s @ z / N
        pres = np.linalg.norm(rp) / (1 + np.linalg.norm(h))
        dres = np.linalg.norm(rd)
        gap = abs(h @ z - x[0]) / (1 + abs(x[0]))
        say(f"interior point {it}: w = {x[0]:.10f}, residuals {pres:.1e} {dres:.1e}, gap {gap:.1e}")
        if pres < tol and dres < 1e-4 and (best is None or gap < best[0]):
            best = (gap, x.copy(), it)
        # the dual residual can stall near 1e-5 on the largest programs
        if pres < tol and dres < 1e-5 and gap < 1e-8:
            return x
        if best is not None and best[0] < 1e-7 and it - best[2] >= 5:
            say("interior point stalled; using the best iterate")
            return best[1]
        d = z / s
        M = (AT.multiply(d[:m]) @ A).toarray()
        M[diag, diag] += d[m : m + n - 1] + d[m + n - 1 :]
        M[np.diag_indices(n)] += 1e-12 * max(float(M.diagonal().max()), 1.0)
        try:
            F = la.cho_factor(M, lower=True, check_finite=False)
        except la.LinAlgError:
            break
        del M

        def solve(rc):
            dx = la.cho_solve(F, -rd - GTz(d * rp) + GTz(rc / s), check_finite=False)
            dz = d * (Gx(dx) + rp) - rc / s
            return dx, (-rc - s * dz) / z, dz

        dx, ds, dz = solve(s * z)
        ap, ad = step(s, ds), step(z, dz)
        centring = ((s + ap * ds) @ (z + ad * dz) / N / mu) ** 3
        dx, ds, dz = solve(s * z + ds * dz - centring * mu)
        ap, ad = 0.99 * step(s, ds), 0.99 * step(z, dz)
        x += ap * dx
        s += ap * ds
        z += ad * dz
    # the exact stage decides optimality, so a near-optimal iterate is still useful
    return best[1] if best is not None and best[0] < 1e-6 else None


def _face_point(lp: LinearProgram, rows, w, guess: np.ndarray):
    """Exact ``x`` with ``x_0 = w`` making ``rows`` tight, other entries near ``guess``.

    Sparse elimination picks one pivot variable per independent row.  The
    remaining variables are rounded to the grid ``1/K`` and the pivots solved
    for; ``K`` grows until every row of P holds.  Returns ``None`` when the
    rows are inconsistent with ``w`` or no grid works.
    """
    pivots: dict[int, tuple[dict[int, object], object]] = {}
    seq: list[int] = []
    for r in rows:
        lo, hi = lp.indptr[r], lp.indptr[r + 1]
        d: dict[int, object] = {}
        b = _Q(-int(lp.const[r]))
        for j, a in zip(lp.indices[lo:hi].tolist(), lp.data[lo:hi].tolist()):
            if j == 0:
                b -= a * w
            else:
                d[j] = _Q(a)
        while hit := [j for j in d if j in pivots]:
            for j in hit:
                f = d.pop(j, None)
                if not f:
                    continue
                pr, pb = pivots[j]
                for k, v in pr.items():
                    nv = d.get(k, 0) - f * v
                    if nv:
                        d[k] = nv
                    else:
                        d.pop(k, None)
                b -= f * pb
        if not d:
            if b:
                return None
            continue
        j = max(d, key=lambda k: abs(d[k]))
        f = d[j]
        pivots[j] = ({k: v / f for k, v in d.items() if k != j}, b / f)
        seq.append(j)
    D = _Dual(lp)
    base = int(w.denominator)
    for p in range(10):
        K = base * 10**p
        x = [_Q(round(float(v) * K), K) for v in guess]
        x[0] = w
        for j in reversed(seq):
            pr, pb = pivots[j]
            x[j] = pb - sum(v * x[k] for k, v in pr.items())
        s, _ = D.slacks({j: v for j, v in enumerate(x) if v})
        if not (s < 0).any():
            return x
    return None


def _solve_from_interior(lp: LinearProgram, say, rounds: int = 20) -> SolveResult | None:
    """Optimum from the interior-point solution, or ``None`` to fall back.

    The rows tight at the float optimum form a small program whose exact
    optimum ``U`` and dual come from the simplex path.  That dual is feasible
    for the full D, so ``U`` bounds P from above; an exact feasible point of P
    with ``w = U`` closes the gap.  Rows it violates join the small program.
    """
    xf = _interior_point(lp, say=say)
    if xf is None:
        say("interior point method did not converge")
        return None
    A = lp.matrix().astype(float).tocsr()
    slack = A @ xf + lp.const
    active = np.union1d(np.flatnonzero(slack < 1e-7), np.flatnonzero(lp.row_kind == ROW_CAP))
    D = _Dual(lp)
    for _ in range(rounds):
        sub = lp.restrict(active)
        res = solve_exact(sub, method="highs")
        w = _Q(res.w.numerator, res.w.denominator)
        tight = np.union1d(np.flatnonzero(slack < 1e-7), active[sorted(res.dual)])
        say(f"tight program with {active.size} rows: w = {res.w}")
        x = _face_point(lp, tight.tolist(), w, xf)
        if x is not None:
            dual = {int(active[r]): y for r, y in res.dual.items()}
            status = "cap_bound" if res.w == 1 else "optimal"
            stats = {"rows": lp.n_rows, "variables": lp.n_vars, "tight_rows": int(active.size)}
            return SolveResult(status, res.w, [_frac(v) for v in x], dual, res.iterations, True, stats)
        pi = {j: _Q(v) for j, v in enumerate(res.x) if v}
        s, _ = D.slacks(pi)
        bad = np.setdiff1d(np.flatnonzero(s < 0), active)
        if bad.size == 0:
            return None
        active = np.union1d(active, bad[np.argsort(slack[bad], kind="stable")[:2000]])
    return None


def _order(key) -> tuple[int, int]:
    # artificials rank before real columns when breaking ties
    return (0, key[1]) if key[0] == "a" else (1, key[1])


def solve_exact(
    lp: LinearProgram,
    warm_start: bool = True,
    max_iterations: int | None = None,
    progress: Callable[[str], None] | None = None,
    method: str = "auto",
) -> SolveResult:
    """Maximise ``w`` exactly; the returned ``x`` satisfies every row exactly.

    ``method`` picks the float front end: ``"interior"`` (large programs),
    ``"highs"`` (column generation) or ``"auto"``.  ``warm_start=False``
    skips both and runs the exact simplex from the cap column.
    """
    if method not in ("auto", "interior", "highs"):
        raise ValueError(f"unknown method {method!r}")
    say = progress or (lambda msg: None)
    if method == "auto":
        # the dense normal matrix needs 8 n^2 bytes
        method = "interior" if lp.n_rows > INTERIOR_MIN_ROWS and lp.n_vars <= INTERIOR_MAX_VARS else "highs"
    if warm_start and method == "interior":
        res = _solve_from_interior(lp, say)
        if res is not None:
            return res
        say("falling back to column generation")
    D = _Dual(lp)
    n = D.n
    cap = int(np.flatnonzero(lp.row_kind == ROW_CAP)[0])
    cold = [("r", cap)] + [("a", j) for j in range(1, n)]
    keys = _warm_basis(lp, say) if warm_start else None
    warm = keys is not None
    basis = None
    if warm:
        try:
            basis = _Basis([D.column(k) for k in keys], n)
            y = basis.solve({0: _Q(1)})
            if any(v < 0 for p, v in y.items() if keys[p][0] == "r") or any(
                v != 0 for p, v in y.items() if keys[p][0] == "a"
            ):
                say("warm basis is not dual feasible; starting from the cap column")
                warm, basis = False, None
        except SingularBasis:
            say("warm basis is singular; starting from the cap column")
            warm, basis = False, None
    if basis is None:
        keys = cold
        basis = _Basis([D.column(k) for k in keys], n)
        y = basis.solve({0: _Q(1)})

    it = 0
    while True:
        pi = basis.solve_transpose({p: D.cost(k) for p, k in enumerate(keys) if D.cost(k)})
        s, L = D.slacks(pi)
        neg = np.flatnonzero(s < 0)
        if neg.size == 0:
            break
        if max_iterations is not None and it >= max_iterations:
            raise RuntimeError(f"iteration limit {max_iterations} reached")
        q = int(neg[0])
        col = D.column(("r", q))
        u = basis.solve(col)
        best = None
        for p, up in u.items():
            k = keys[p]
            if k[0] == "a":
                ratio = _Q(0)
            elif up > 0:
                ratio = y.get(p, _Q(0)) / up
            else:
                continue
            cand = (ratio, _order(k))
            if best is None or cand < best[0]:
                best = (cand, p)
        if best is None:
            raise RuntimeError("dual problem unbounded; the program has no feasible point")
        theta, p = best[0][0], best[1]
        up = u[p]
        ny = {}
        for i, ui in u.items():
            if i != p:
                v = y.get(i, _Q(0)) - theta * ui
                if v:
                    ny[i] = v
        for i, v in y.items():
            if i not in u and i != p:
                ny[i] = v
        if theta:
            ny[p] = theta
        y = ny
        keys[p] = ("r", q)
        basis.replace(p, col, u)
        it += 1
        if it % 50 == 0:
            say(f"iteration {it}: objective {float(sum(D.cost(keys[i]) * v for i, v in y.items())):.6f}")
        del up

    x = [_frac(pi.get(j, _Q(0))) for j in range(n)]
    dual = {keys[p][1]: _frac(v) for p, v in y.items() if keys[p][0] == "r" and v}
    w = x[0]
    status = "cap_bound" if w == 1 else "optimal"
    return SolveResult(status, w, x, dual, it, warm, {"rows": lp.n_rows, "variables": n})


# --- certificates ------------------------------------------------------------------------


class CertificateFormatError(ValueError):
    pass


@dataclass
class Certificate:
    """Rational charge assignment proving density at least ``w``."""

    grid: str
    variant: str
    hash: str
    w: Fraction
    sigma: dict[str, Fraction]
    c: Fraction
    d: int


def certificate_from(lp: LinearProgram, result: SolveResult) -> Certificate:
    sigma = {name: result.x[j] for j, name in enumerate(lp.var_names) if j}
    sigma.update((name, Fraction(0)) for name in lp.unused)
    c = max((abs(v) for v in sigma.values()), default=Fraction(0))
    return Certificate(lp.grid.kind, lp.variant.value, lp.hash, result.w, sigma, c, lp.locality)


def format_certificate(cert: Certificate) -> str:
    lines = [
        f"grid: {cert.grid}",
        f"variant: {cert.variant}",
        f"hash: {cert.hash}",
        f"w: {cert.w}",
        f"c: {cert.c}",
        f"d: {cert.d}",
    ]
    lines += [f"sigma {name}: {v}" for name, v in sorted(cert.sigma.items())]
    return "\n".join(lines) + "\n"


def parse_certificate(text: str) -> Certificate:
    head: dict[str, str] = {}
    sigma: dict[str, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise CertificateFormatError(f"line {lineno}: expected 'key: value'")
        key, value = key.strip(), value.strip()
        try:
            if key.startswith("sigma "):
                name = key[6:].strip()
                if name in sigma:
                    raise CertificateFormatError(f"line {lineno}: {name} assigned twice")
                sigma[name] = Fraction(value)
            elif key in ("grid", "variant", "hash", "w", "c", "d"):
                if key in head:
                    raise CertificateFormatError(f"line {lineno}: repeated {key!r}")
                head[key] = value
            else:
                raise CertificateFormatError(f"line {lineno}: unknown field {key!r}")
        except (ValueError, ZeroDivisionError) as e:
            if isinstance(e, CertificateFormatError):
                raise
            raise CertificateFormatError(f"line {lineno}: bad number {value!r}") from None
    missing = {"grid", "variant", "hash", "w"} - set(head)
    if missing:
        raise CertificateFormatError(f"missing fields: {', '.join(sorted(missing))}")
    try:
        w = Fraction(head["w"])
        c = Fraction(head["c"]) if "c" in head else max((abs(v) for v in sigma.values()), default=Fraction(0))
        d = int(head.get("d", 0))
    except (ValueError, ZeroDivisionError):
        raise CertificateFormatError("bad number in header") from None
    return Certificate(head["grid"], head["variant"], head["hash"], w, sigma, c, d)


def lower_bound(g, variant, rules, verify: bool = True, dedupe: bool = True, progress=None) -> Fraction:
    """Best density bound provable with ``rules``; the certificate is re-checked when ``verify``."""
    from .lp import build_lp
    from .verify import verify_certificate

    lp = build_lp(g, variant, rules, dedupe=dedupe, progress=progress)
    res = solve_exact(lp, progress=progress)
    if verify:
        check = verify_certificate(g, variant, rules, certificate_from(lp, res), progress=progress)
        if not check.ok:
            raise RuntimeError(f"certificate rejected: {check.witness}")
    return res.w
