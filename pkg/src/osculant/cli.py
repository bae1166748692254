"""Command-line front end.

Subcommands::

    osculant analyze SPEC [--point X,Y] [--max-order R] [--tol T] [--format json|csv] [--out FILE]
    osculant extremal --n N --r R [--out FILE]
    osculant random --n N --m M --degree D --seed S [--out FILE]
    osculant verify --suite gallery|random [--count C] [--seed S] [--tol T] [--out FILE]
    osculant save-gallery DIR

The rank tolerance defaults to 1e-8; ``OSCULANT_TOL`` overrides the default
and ``--tol`` overrides both.  Exit codes: 0 success, 1 input error,
2 verification failure.
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .curvature import analyze
from .immersion import SpecError, extremal_example, load_spec, random_polynomial_immersion, save_gallery, save_spec
from .linalg import RankTolerance
from .report import dumps_json, report_csv, report_document
from .suite import format_table, run_suite, suite_cases

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2

DEFAULT_TOL = 1e-8


class InputError(Exception):
    pass


def resolve_tolerance(flag: float | None) -> RankTolerance:
    if flag is not None:
        value = flag
    elif os.environ.get("OSCULANT_TOL"):
        try:
            value = float(os.environ["OSCULANT_TOL"])
        except ValueError:
            raise InputError(f"OSCULANT_TOL is not a number: {os.environ['OSCULANT_TOL']!r}") from None
    else:
        value = DEFAULT_TOL
    try:
        return RankTolerance(value)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _parse_point(text: str, n: int) -> np.ndarray:
    try:
        values = [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise InputError(f"--point must be comma-separated numbers, got {text!r}") from None
    if len(values) != n:
        raise InputError(f"--point needs {n} coordinates, got {len(values)}")
    return np.array(values)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    try:
        im, point, max_order = load_spec(Path(args.spec))
    except OSError as exc:
        raise InputError(f"cannot read {args.spec}: {exc.strerror}") from None
    if args.point is not None:
        point = _parse_point(args.point, im.dim_domain)
    if args.max_order is not None:
        max_order = args.max_order
    if max_order < 1:
        raise InputError(f"--max-order must be at least 1, got {max_order}")
    tol = resolve_tolerance(args.tol)
    seed = None if args.no_invariance else args.invariance_seed
    report = analyze(im, point, max_order, tol, invariance_seed=seed)

    if args.format == "csv":
        text = report_csv(report)
    else:
        doc = report_document(report)
        if args.stamp:
            doc["meta"]["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        text = dumps_json(doc) + "\n"
    _emit(text, args.out)

    for lv in report.levels:
        if lv.ill_conditioned:
            print(f"warning: order {lv.order} is ill-conditioned: {'; '.join(lv.notes)}", file=sys.stderr)
    if not report.bound_satisfied:
        print("verification failure: a rank exceeds its bound", file=sys.stderr)
        return EXIT_VERIFY
    if not report.oracle_match:
        print(
            f"verification failure: dims {report.dims} != oracle dims {report.oracle_dims}",
            file=sys.stderr,
        )
        return EXIT_VERIFY
    return EXIT_OK


def cmd_extremal(args) -> int:
    if args.n < 1 or args.r < 1:
        raise InputError(f"extremal example needs --n >= 1 and --r >= 1, got n={args.n}, r={args.r}")
    im = extremal_example(args.n, args.r)
    _emit(save_spec(im, np.zeros(args.n), args.r), args.out)
    return EXIT_OK


def cmd_random(args) -> int:
    if args.n < 1 or args.m < args.n or args.degree < 1:
        raise InputError("random immersion needs n >= 1, m >= n and degree >= 1")
    im = random_polynomial_immersion(args.n, args.m, args.degree, args.seed)
    _emit(save_spec(im, np.zeros(args.n), args.max_order), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    tol = resolve_tolerance(args.tol)
    if args.count < 0:
        raise InputError("--count must be non-negative")
    cases = suite_cases(args.suite, args.count, args.seed)
    results = run_suite(cases, tol, rotations=args.rotations, seed=args.seed, jobs=args.jobs)
    table = format_table(results)
    sys.stdout.write(table)
    if args.out:
        doc = {
            "suite": args.suite,
            "count": len(results),
            "seed": args.seed,
            "tolerance": tol.rel_tol,
            "rotations": args.rotations,
            "tool_version": __version__,
            "passed": all(r.passed for r in results),
            "cases": [r.as_dict() for r in results],
        }
        Path(args.out).write_text(dumps_json(doc) + "\n")
    failed = [r for r in results if not r.passed]
    for r in failed:
        reason = r.error or ", ".join(k for k, ok in r.checks.items() if not ok)
        print(f"FAILED {r.name}: {reason}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_VERIFY


def cmd_save_gallery(args) -> int:
    for path in save_gallery(args.dir):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osculant",
        description="Higher-order normal curvatures and osculating spaces of parametrized immersions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze one immersion spec file")
    p.add_argument("spec")
    p.add_argument("--point", help="base point as comma-separated coordinates")
    p.add_argument("--max-order", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.add_argument("--invariance-seed", type=int, default=0)
    p.add_argument("--no-invariance", action="store_true", help="skip the frame-invariance check")
    p.add_argument("--stamp", action="store_true", help="add a generation timestamp to the JSON meta")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("extremal", help="write the extremal polynomial example as a spec file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("random", help="write a seeded random polynomial immersion")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-order", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--suite", choices=("gallery", "random"), default="gallery")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--tol", type=float)
    p.add_argument("--rotations", type=int, default=1, help="domain rotations per case")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="also write a JSON summary")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("save-gallery", help="copy the bundled gallery spec files")
    p.add_argument("dir")
    p.set_defaults(func=cmd_save_gallery)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
