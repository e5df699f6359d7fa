"""Command-line interface.

Exit codes: 0 success, 1 a certificate or pattern was rejected, 2 usage
or input error, 3 internal error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .codes import Variant, forbidden_family
from .config import ConfigFormatError, format_configuration
from .grid import GRID_KINDS, get_grid
from .rules import RuleError, builtin_names, builtin_rule, parse_rule

EXIT_OK, EXIT_REJECTED, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("gridcharge")


class UsageError(Exception):
    pass


def _threads(args) -> None:
    n = getattr(args, "threads", None)
    if n is None:
        n = os.environ.get("GRIDCHARGE_THREADS")
    if n is None or n == "":
        return
    try:
        n = int(n)
    except ValueError:
        raise UsageError(f"invalid thread count {n!r}") from None
    if n < 1:
        raise UsageError("thread count must be positive")
    try:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:  # pragma: no cover
        pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from None


def _load_rules(args):
    g = get_grid(args.grid)
    rules = []
    for text in args.rules or []:
        for name in filter(None, (s.strip() for s in text.split(","))):
            rules.append(builtin_rule(g, name))
    for path in args.rule_file or []:
        rule = parse_rule(_read(path))
        if rule.grid.kind != g.kind:
            raise UsageError(f"{path}: rule is for the {rule.grid.kind} grid")
        rules.append(rule)
    if not rules:
        raise UsageError("give at least one rule with --rules or --rule-file")
    return g, rules


def _progress(args):
    if not args.progress:
        return None
    start = time.monotonic()
    return lambda msg: print(f"[{time.monotonic() - start:8.1f}s] {msg}", file=sys.stderr, flush=True)


def cmd_bound(args) -> int:
    from .lp import build_lp
    from .simplex import certificate_from, format_certificate, solve_exact
    from .verify import verify_certificate

    g, rules = _load_rules(args)
    say = _progress(args)
    start = time.monotonic()
    lp = build_lp(g, args.variant, rules, dedupe=args.dedupe, progress=say)
    res = solve_exact(lp, warm_start=not args.cold, progress=say)
    cert = certificate_from(lp, res)
    if args.certificate:
        _write(args.certificate, format_certificate(cert))
    status = res.status
    if not args.no_verify:
        check = verify_certificate(g, args.variant, rules, cert, progress=say)
        if not check.ok:
            print(f"certificate rejected: {check.witness}", file=sys.stderr)
            return EXIT_REJECTED
        status += ", verified"
    print(f"w = {res.w} ({float(res.w):.6f}) [{status}]")
    print(f"program: {lp.n_rows} rows, {lp.n_vars} variables; {time.monotonic() - start:.1f}s")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .simplex import CertificateFormatError, parse_certificate
    from .verify import CertificateMismatch, verify_certificate

    g, rules = _load_rules(args)
    try:
        cert = parse_certificate(_read(args.certificate))
    except CertificateFormatError as e:
        raise UsageError(f"{args.certificate}: {e}") from None
    try:
        check = verify_certificate(g, args.variant, rules, cert, progress=_progress(args))
    except CertificateMismatch as e:
        print(f"rejected: {e}", file=sys.stderr)
        return EXIT_REJECTED
    if not check.ok:
        print(f"rejected: {check.witness}", file=sys.stderr)
        return EXIT_REJECTED
    print(f"accepted: w = {cert.w} ({check.checked} realizations checked)")
    return EXIT_OK


def cmd_export(args) -> int:
    from .lp import build_lp, export_lp

    g, rules = _load_rules(args)
    lp = build_lp(g, args.variant, rules, dedupe=args.dedupe, progress=_progress(args))
    _write(args.out, export_lp(lp, args.format))
    return EXIT_OK


def cmd_pattern_search(args) -> int:
    from .patterns import format_pattern, search_optimal

    res = search_optimal(args.grid, args.variant, args.max_vertices)
    if res.pattern is None:
        print(f"no valid pattern with at most {args.max_vertices} vertices per period")
        return EXIT_OK
    print(f"density = {res.density} ({float(res.density):.6f}) over {res.lattices_scanned} lattices")
    if args.out:
        _write(args.out, format_pattern(res.pattern))
    else:
        sys.stdout.write(format_pattern(res.pattern))
    return EXIT_OK


def cmd_pattern_check(args) -> int:
    from .patterns import parse_pattern, pattern_density, pattern_violation

    pat = parse_pattern(_read(args.pattern))
    bad = pattern_violation(pat, args.variant)
    if bad is not None:
        print(f"invalid: forbidden configuration {bad[0]} at {bad[1]}")
        return EXIT_REJECTED
    d = pattern_density(pat)
    print(f"valid, density = {d} ({float(d):.6f})")
    return EXIT_OK


def cmd_list_rules(args) -> int:
    for kind in GRID_KINDS if args.grid is None else [get_grid(args.grid).kind]:
        for name in builtin_names():
            try:
                r = builtin_rule(kind, name)
            except RuleError:
                continue
            print(f"{kind:11s} {name:4s} |V|={len(r.shape.V):2d} |F|={len(r.shape.F)} sources={r.t}")
    return EXIT_OK


def cmd_list_forbidden(args) -> int:
    fam = forbidden_family(args.grid, args.variant)
    print(f"# {len(fam)} configurations")
    for c in fam:
        print(format_configuration(fam.grid, c))
    return EXIT_OK


def _variant(text: str) -> str:
    try:
        return Variant.parse(text).value
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _grid(text: str) -> str:
    try:
        return get_grid(text).kind
    except (KeyError, ValueError) as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridcharge", description="Discharging bounds for codes on plane grids.")
    p.add_argument("--threads", type=int, help="kernel threads (default: GRIDCHARGE_THREADS or all)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, rules=True):
        sp.add_argument("--grid", required=True, type=_grid)
        sp.add_argument("--variant", required=True, type=_variant)
        if rules:
            sp.add_argument("--rules", action="append", help="built-in rule names, comma separated")
            sp.add_argument("--rule-file", action="append", help="rule file (repeatable)")
        sp.add_argument("--progress", action="store_true", help="report progress on stderr")
        sp.add_argument("--threads", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)

    b = sub.add_parser("bound", help="compute and verify the best bound for a rule set")
    common(b)
    b.add_argument("--certificate", help="write the certificate here")
    b.add_argument("--no-verify", action="store_true")
    b.add_argument("--no-dedupe", dest="dedupe", action="store_false", help="keep symmetric realizations")
    b.add_argument("--cold", action="store_true", help="skip the floating-point warm start")
    b.set_defaults(func=cmd_bound)

    v = sub.add_parser("verify", help="check a certificate independently")
    common(v)
    v.add_argument("--certificate", required=True)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="write the linear program")
    common(e)
    e.add_argument("--format", choices=["native_exact", "solver_text"], default="native_exact")
    e.add_argument("--out")
    e.add_argument("--no-dedupe", dest="dedupe", action="store_false")
    e.set_defaults(func=cmd_export)

    s = sub.add_parser("pattern-search", help="least-density periodic code up to a period size")
    common(s, rules=False)
    s.add_argument("--max-vertices", "--area", dest="max_vertices", type=int, required=True,
                   help="largest fundamental domain, in vertices")
    s.add_argument("--out")
    s.set_defaults(func=cmd_pattern_search)

    c = sub.add_parser("pattern-check", help="validate a pattern file")
    c.add_argument("--variant", required=True, type=_variant)
    c.add_argument("--pattern", required=True)
    c.add_argument("--progress", action="store_true")
    c.set_defaults(func=cmd_pattern_check)

    lr = sub.add_parser("list-rules", help="show the built-in rules")
    lr.add_argument("--grid", type=_grid)
    lr.set_defaults(func=cmd_list_rules)

    lf = sub.add_parser("list-forbidden", help="show a forbidden family")
    common(lf, rules=False)
    lf.set_defaults(func=cmd_list_forbidden)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _threads(args)
        return args.func(args)
    except (UsageError, RuleError, ConfigFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
