"""Acceptance criteria, one test per criterion.

Bounds are computed the way ``gridcharge bound`` computes them (build,
exact solve, independent verification) and cached for the later criteria
that reuse them.  The large programs take minutes; the whole file runs in
about ten minutes on one core.
"""
import random
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

import pytest

from _oracles import domain_objects, nearby_objects, random_pattern, random_sigma
from gridcharge.cli import main
from gridcharge.codes import definition_violation
from gridcharge.discharge import net_from_transfers, transfers
from gridcharge.grid import GRID_KINDS, get_grid
from gridcharge.lp import RowEvaluator, build_lp
from gridcharge.patterns import pattern_density, pattern_valid, search_optimal
from gridcharge.rules import builtin_rule
from gridcharge.simplex import Certificate, certificate_from, solve_exact
from gridcharge.verify import verify_certificate

EXAMPLES = Path(__file__).resolve().parent.parent / "rules"
MINUTE = 60


@dataclass
class Bound:
    w: Fraction
    seconds: float
    verified: bool
    rules: list
    cert: Certificate
    # sigma with one variable of a tight row moved so that row fails
    tight_nudge: dict


_cache: dict = {}


def tight_nudge(lp, res, eps=Fraction(1, 1000)):
    for r in sorted(res.dual):
        _, coeffs = lp.row(r)
        for j, a in coeffs.items():
            if j:
                sigma = dict(certificate_from(lp, res).sigma)
                sigma[lp.var_names[j]] -= eps if a > 0 else -eps
                return sigma
    raise AssertionError("no tight row with a rule variable")


def bound(kind, variant, names) -> Bound:
    key = (kind, variant, names)
    if key not in _cache:
        rules = [builtin_rule(kind, n) for n in names]
        start = time.monotonic()
        lp = build_lp(kind, variant, rules, dedupe=True)
        res = solve_exact(lp)
        cert = certificate_from(lp, res)
        ok = verify_certificate(kind, variant, rules, cert).ok
        seconds = time.monotonic() - start
        _cache[key] = Bound(res.w, seconds, ok, rules, cert, tight_nudge(lp, res))
        del lp, res
    return _cache[key]


def check_bounds(cases, limit):
    for kind, variant, names, want in cases:
        b = bound(kind, variant, names)
        assert b.w == want, (kind, variant, names, b.w)
        assert b.verified, (kind, variant, names)
        assert b.seconds < limit, (kind, variant, names, b.seconds)


def test_criterion_01_dominating_v1():
    check_bounds(
        [
            ("hexagonal", "dominating", ("V1",), Fraction(1, 4)),
            ("square", "dominating", ("V1",), Fraction(1, 5)),
            ("triangular", "dominating", ("V1",), Fraction(1, 7)),
        ],
        10,
    )


def test_criterion_02_identifying_v1():
    check_bounds(
        [
            ("hexagonal", "identifying", ("V1",), Fraction(2, 5)),
            ("square", "identifying", ("V1",), Fraction(3, 10)),
            ("triangular", "identifying", ("V1",), Fraction(1, 4)),
        ],
        MINUTE,
    )


@pytest.mark.slow
def test_criterion_03_identifying_v2():
    check_bounds(
        [
            ("hexagonal", "identifying", ("V2",), Fraction(33, 80)),
            ("square", "identifying", ("V2",), Fraction(7, 20)),
        ],
        30 * MINUTE,
    )


@pytest.mark.slow
def test_criterion_04_hexagonal_identifying_n():
    check_bounds([("hexagonal", "identifying", ("N",), Fraction(23, 55))], 4 * 60 * MINUTE)


@pytest.mark.slow
def test_criterion_05_hexagonal_locating_variants_v2():
    check_bounds(
        [
            ("hexagonal", "locating_dominating", ("V2",), Fraction(1, 3)),
            ("hexagonal", "open_locating_dominating", ("V2",), Fraction(1, 2)),
        ],
        30 * MINUTE,
    )


@pytest.mark.slow
def test_criterion_06_monotone_in_the_rule_shape():
    v1 = bound("hexagonal", "identifying", ("V1",)).w
    v2 = bound("hexagonal", "identifying", ("V2",)).w
    n = bound("hexagonal", "identifying", ("N",)).w
    assert Fraction(2, 5) == v1 <= v2 <= n == Fraction(23, 55)
    assert v2 == Fraction(33, 80)


VARIANTS = ["dominating", "identifying", "locating_dominating", "open_locating_dominating"]


def test_criterion_07_oracle_equivalence():
    for kind in GRID_KINDS:
        g = get_grid(kind)
        rules = [builtin_rule(g, "V1")]
        for variant in VARIANTS:
            rng = random.Random(f"acceptance-{kind}-{variant}")
            ev = RowEvaluator(g, variant, rules)
            valid = 0
            for _ in range(100):
                pat = random_pattern(g, rng, max_cells=4)
                direct = definition_violation(g, variant, pat.contains, pat.domain()) is None
                assert direct == pattern_valid(pat, variant), (kind, variant, pat.period, sorted(pat.elements))
                if not direct:
                    continue
                valid += 1
                sigma = random_sigma(ev.names, rng)
                moved = transfers(g, rules, ev.tables, sigma, pat.contains, nearby_objects(g, pat))
                dom = domain_objects(g, pat)
                rows = {o: ev.net_charge(o, pat.contains, sigma) for o in dom}
                assert rows == net_from_transfers(moved, dom)
                assert sum(rows.values()) == 0
            assert valid > 0, (kind, variant)


def test_criterion_08_certificate_robustness():
    if not _cache:
        bound("hexagonal", "identifying", ("V1",))
    for (kind, variant, _), b in list(_cache.items()):
        assert verify_certificate(kind, variant, b.rules, b.cert).ok
        raised = verify_certificate(kind, variant, b.rules, replace(b.cert, w=b.cert.w + Fraction(1, 10**6)))
        assert not raised.ok and raised.witness["charge"] < raised.witness["required"]
        nudged = verify_certificate(kind, variant, b.rules, replace(b.cert, sigma=b.tight_nudge))
        assert not nudged.ok and {"center", "elements", "charge", "required"} <= set(nudged.witness)


def test_criterion_09_search_meets_the_lp_bound():
    for kind, area, want in [("hexagonal", 8, Fraction(1, 4)), ("square", 5, Fraction(1, 5)), ("triangular", 7, Fraction(1, 7))]:
        start = time.monotonic()
        res = search_optimal(kind, "dominating", area)
        assert time.monotonic() - start < 5 * MINUTE
        assert res.density == want == pattern_density(res.pattern)
        assert pattern_valid(res.pattern, "dominating")
        assert bound(kind, "dominating", ("V1",)).w == res.density


def test_criterion_10_user_rule_files(tmp_path, capsys):
    cert = tmp_path / "j2.cert"
    rule_args = ["--grid", "hex", "--variant", "identifying", "--rules", "V1", "--rule-file", str(EXAMPLES / "hex_J2.rule")]
    assert main(["bound", *rule_args, "--certificate", str(cert)]) == 0
    assert main(["verify", *rule_args, "--certificate", str(cert)]) == 0
    assert "accepted" in capsys.readouterr().out
    shipped = sorted(EXAMPLES.glob("*.rule"))
    assert len(shipped) >= 4
    assert all("unverified" in p.read_text().splitlines()[0] for p in shipped)
