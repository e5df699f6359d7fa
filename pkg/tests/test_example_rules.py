from pathlib import Path

import pytest

from gridcharge.config import embeddings_onto
from gridcharge.grid import Vertex
from gridcharge.lp import build_lp
from gridcharge.rules import builtin_rule, parse_rule
from gridcharge.simplex import certificate_from, solve_exact
from gridcharge.verify import verify_certificate

RULES = Path(__file__).resolve().parent.parent / "rules"
FILES = sorted(RULES.glob("*.rule"))


def load(name):
    return parse_rule((RULES / name).read_text())


def test_examples_exist_and_are_marked():
    assert FILES
    for path in FILES:
        assert "unverified" in path.read_text().splitlines()[0]


@pytest.mark.parametrize("path", FILES, ids=lambda p: p.stem)
def test_example_rules_parse(path):
    rule = parse_rule(path.read_text())
    assert rule.grid.kind == "hexagonal" and rule.t >= 1


def test_j2_embedding_counts():
    rule = load("hex_J2.rule")
    g = rule.grid
    assert len(embeddings_onto(g, rule.shape, rule.z, g.origin_face())) == 6
    y = rule.ys[0]
    assert isinstance(y, Vertex)
    assert len(embeddings_onto(g, rule.shape, y, g.origin_vertex())) == 3


@pytest.mark.parametrize("name, variant", [("hex_J2.rule", "identifying"), ("hex_C3.rule", "dominating")])
def test_user_rule_files_give_verified_certificates(name, variant):
    rules = [builtin_rule("hex", "V1"), load(name)]
    lp = build_lp("hex", variant, rules, dedupe=True)
    res = solve_exact(lp)
    check = verify_certificate("hex", variant, rules, certificate_from(lp, res))
    assert check.ok
    # extra rules can only help
    alone = solve_exact(build_lp("hex", variant, rules[:1], dedupe=True)).w
    assert res.w >= alone
