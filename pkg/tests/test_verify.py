from dataclasses import replace
from fractions import Fraction

import pytest

from gridcharge.lp import build_lp
from gridcharge.rules import builtin_rule
from gridcharge.simplex import certificate_from, solve_exact
from gridcharge.verify import CertificateMismatch, certificate_digest, verify_certificate


def solved(kind, variant, *names):
    rules = [builtin_rule(kind, n) for n in names]
    lp = build_lp(kind, variant, rules, dedupe=True)
    res = solve_exact(lp)
    return rules, lp, res, certificate_from(lp, res)


def tight_perturbation(lp, res, eps=Fraction(1, 1000)):
    """sigma with one variable of a tight row nudged so that row fails."""
    for r in sorted(res.dual):
        _, coeffs = lp.row(r)
        for j, a in coeffs.items():
            if j:
                sigma = {lp.var_names[k]: res.x[k] for k in range(1, lp.n_vars)}
                sigma[lp.var_names[j]] -= eps if a > 0 else -eps
                return sigma
    raise AssertionError("no tight row with a rule variable")


@pytest.fixture(scope="module")
def hex_identifying():
    return solved("hexagonal", "identifying", "V1")


def test_fresh_certificate_verifies(hex_identifying):
    rules, _, _, cert = hex_identifying
    check = verify_certificate("hexagonal", "identifying", rules, cert)
    assert check.ok and check.w == Fraction(2, 5) and check.checked > 0


@pytest.mark.parametrize("bump", [Fraction(1, 10**9), Fraction(1, 7), Fraction(3)])
def test_raised_w_is_rejected(hex_identifying, bump):
    rules, _, _, cert = hex_identifying
    check = verify_certificate("hexagonal", "identifying", rules, replace(cert, w=cert.w + bump))
    assert not check.ok
    wit = check.witness
    assert wit["charge"] < wit["required"]


def test_tight_sigma_perturbation_is_rejected(hex_identifying):
    rules, lp, res, cert = hex_identifying
    check = verify_certificate("hexagonal", "identifying", rules, replace(cert, sigma=tight_perturbation(lp, res)))
    assert not check.ok
    assert {"center", "elements", "charge", "required"} <= set(check.witness)


def test_missing_variable_is_reported(hex_identifying):
    rules, _, _, cert = hex_identifying
    sigma = dict(cert.sigma)
    sigma.pop(sorted(sigma)[0])
    check = verify_certificate("hexagonal", "identifying", rules, replace(cert, sigma=sigma))
    assert not check.ok and "missing_variable" in check.witness


def test_mismatches_raise(hex_identifying):
    rules, _, _, cert = hex_identifying
    with pytest.raises(CertificateMismatch):
        verify_certificate("square", "identifying", [builtin_rule("square", "V1")], cert)
    with pytest.raises(CertificateMismatch):
        verify_certificate("hexagonal", "dominating", rules, cert)
    with pytest.raises(CertificateMismatch):
        verify_certificate("hexagonal", "identifying", [builtin_rule("hexagonal", "V2")], cert)


def test_digest_matches_builder(hex_identifying):
    rules, lp, _, cert = hex_identifying
    assert certificate_digest("hexagonal", "identifying", rules) == lp.hash == cert.hash


@pytest.mark.parametrize(
    "kind, variant, names",
    [
        ("square", "dominating", ("V1", "C1")),
        pytest.param("hexagonal", "identifying", ("V1", "E1"), marks=pytest.mark.slow),
        ("triangular", "identifying", ("V1",)),
    ],
)
def test_certificates_for_rule_combinations(kind, variant, names):
    rules, lp, res, cert = solved(kind, variant, *names)
    assert verify_certificate(kind, variant, rules, cert).ok
    assert not verify_certificate(kind, variant, rules, replace(cert, w=cert.w + Fraction(1, 100))).ok
    assert not verify_certificate(kind, variant, rules, replace(cert, sigma=tight_perturbation(lp, res))).ok


def test_zero_sigma_proves_nothing_more_than_the_cap():
    rules, _, _, cert = solved("square", "dominating", "V1")
    zero = replace(cert, sigma={k: Fraction(0) for k in cert.sigma}, w=Fraction(0))
    assert verify_certificate("square", "dominating", rules, zero).ok
