"""Command-line interface.

Exit codes: 0 success, 1 unreadable or malformed OFF, 2 polyhedron failed
validation, 3 degree outside the supported range, 4 polynomial degree above
the rule's exactness degree.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import shapes
from .diagnostics import bench_shape, check_shape, rows_to_csv
from .errors import DegreeExceeded, ParseError, UnknownShape
from .geometry import Polyhedron, read_off, validate, write_off
from .rule import MAX_DEGREE, RuleCache, build_rule, stability_report

log = logging.getLogger("polyquad")

EXIT_PARSE, EXIT_INVALID, EXIT_DEGREE_CAP, EXIT_DEGREE_EXCEEDED = 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_valid(path) -> Polyhedron:
    try:
        p = read_off(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_PARSE) from None
    except ParseError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None
    report = validate(p)
    if not report.passed:
        raise CliError(f"{path}: invalid polyhedron: " + "; ".join(report.problems[:5]), EXIT_INVALID)
    return p


def _check_degree(n: int) -> None:
    if not 0 <= n <= MAX_DEGREE:
        raise CliError(f"degree {n} outside supported range [0, {MAX_DEGREE}]", EXIT_DEGREE_CAP)


def _even_degrees(nmax: int) -> list[int]:
    _check_degree(nmax)
    return list(range(4, nmax + 1, 2))


def read_poly(path) -> list[tuple[float, int, int, int]]:
    """Monomial terms ``coeff a b c``, one per line; ``#`` starts a comment."""
    terms = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            tok = raw.split("#", 1)[0].split()
            if not tok:
                continue
            try:
                coeff = float(tok[0])
                a, b, c = (int(t) for t in tok[1:4])
            except ValueError:
                raise ParseError(f"bad polynomial term {raw.strip()!r}", lineno) from None
            if len(tok) != 4 or min(a, b, c) < 0:
                raise ParseError(f"term must be 'coeff a b c' with a, b, c >= 0: {raw.strip()!r}", lineno)
            terms.append((coeff, a, b, c))
    return terms


def cmd_rule(args) -> int:
    _check_degree(args.degree)
    p = _load_valid(args.off)
    rule = build_rule(p, args.degree, threads=args.threads)
    text = rule.to_json() if args.format == "json" else rule.to_csv()
    out = args.out or f"{Path(args.off).stem}_n{args.degree}.{args.format}"
    Path(out).write_text(text)
    print(f"volume {rule.volume_estimate:.17g}")
    print(f"stability_ratio {rule.stability_ratio:.17g}")
    print(f"nodes {len(rule)}")
    log.info("wrote %s", out)
    return 0


def cmd_integrate(args) -> int:
    _check_degree(args.degree)
    p = _load_valid(args.off)
    try:
        terms = read_poly(args.poly)
    except OSError as exc:
        raise CliError(f"cannot read {args.poly}: {exc.strerror}", EXIT_PARSE) from None
    except ParseError as exc:
        raise CliError(f"{args.poly}: {exc}", EXIT_PARSE) from None
    too_high = [t for t in terms if t[1] + t[2] + t[3] > args.degree]
    if too_high:
        _, a, b, c = too_high[0]
        raise CliError(
            str(DegreeExceeded(f"term x^{a} y^{b} z^{c} exceeds exactness degree {args.degree}; result would not be exact")),
            EXIT_DEGREE_EXCEEDED,
        )
    rule = build_rule(p, args.degree, threads=args.threads)
    x, y, z = rule.nodes.T
    samples = np.zeros(len(rule))
    for coeff, a, b, c in terms:
        samples += coeff * x**a * y**b * z**c
    print(f"{rule.weights @ samples:.17g}")
    return 0


def cmd_check(args) -> int:
    p = _load_valid(args.off)
    degrees = _even_degrees(args.nmax)
    kind, rows = check_shape(p, degrees, samples=args.samples, seed=args.seed, threads=args.threads)
    report = {
        "shape": p.label,
        "reference": kind,
        "seed": args.seed,
        "samples": args.samples,
        "rows": [asdict(r) for r in rows],
    }
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.off).stem
    (out / f"{stem}_check.json").write_text(json.dumps(report, indent=2))
    (out / f"{stem}_check.csv").write_text(rows_to_csv(rows, ["n", "stability_ratio", "mean_log_err"]))
    print(f"# {p.label}: reference={kind} samples={args.samples} seed={args.seed}")
    print(f"{'n':>3} {'ratio':>10} {'neg':>6} {'vol_res':>9} {'orth_res':>9} {'xcheck':>9} {'mean_log':>9} {'max_err':>9}")
    for r in rows:
        print(
            f"{r.n:3d} {r.stability_ratio:10.6f} {r.negative_weights:6d} {r.volume_residual:9.1e} "
            f"{r.orthonormality_residual:9.1e} {r.crosscheck_residual:9.1e} {r.mean_log_err:9.2f} {r.max_err:9.1e}"
        )
    return 0


def cmd_bench(args) -> int:
    p = _load_valid(args.off)
    degrees = _even_degrees(args.nmax)
    rows = bench_shape(p, degrees, repeats=args.repeats, threads=args.threads)
    text = rows_to_csv(rows, ["n", "cold_mean_s", "warm_mean_s", "warm_over_cold"])
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_shapes(args) -> int:
    try:
        p = shapes.builtin_shape(args.name)
    except UnknownShape as exc:
        raise CliError(str(exc.args[0]), EXIT_PARSE) from None
    report = validate(p)
    if not report.passed:  # built-ins are constructed valid; guard against regressions
        raise CliError("; ".join(report.problems), EXIT_INVALID)
    out = args.out or f"{args.name}.off"
    write_off(p, out)
    print(f"{args.name}: {len(p.vertices)} vertices, {len(p.faces)} faces, volume {report.volume:.17g} -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyquad", description="Tetrahedra-free quadrature on polyhedra.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, off=True):
        if off:
            sp.add_argument("off", help="ASCII OFF file, faces counter-clockwise seen from outside")
        sp.add_argument("--threads", type=int, default=1, help="moment worker threads (0 = auto)")

    sp = sub.add_parser("rule", help="build a rule and write it as JSON or CSV")
    common(sp)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_rule)

    sp = sub.add_parser("integrate", help="integrate a polynomial given as monomial terms")
    common(sp)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--poly", required=True, help="file with lines 'coeff a b c'")
    sp.set_defaults(func=cmd_integrate)

    sp = sub.add_parser("check", help="stability and accuracy report for even degrees 4..nmax")
    common(sp)
    sp.add_argument("--nmax", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--out", help="output directory for the JSON report and CSV summary")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("bench", help="cold and warm cache build times per degree")
    common(sp)
    sp.add_argument("--nmax", type=int, default=20)
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("shapes", help="write a built-in test polyhedron as OFF")
    sp.add_argument("--name", required=True, help="one of: " + ", ".join(shapes.BUILDERS))
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_shapes)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"polyquad: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
