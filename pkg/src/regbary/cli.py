"""Command-line front end.

Exit codes: 0 ok, 2 invalid argument, 3 validation failure, 4 convergence
failure, 5 theory violation (orbit period above two), 6 property-suite
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import space as spaces
from .barycenter import canonical_barycenter, epsilon_sweep
from .dynamics import orbit, variance_sequence
from .errors import (
    ConvergenceError,
    InvalidArgumentError,
    NoFiniteMetricError,
    PropertyFailure,
    ValidationError,
)
from .ot import solve_ot, variance
from .properties import run_suite

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4
EXIT_THEORY = 5
EXIT_SUITE = 6


def _fmt(x):
    return f"{x:.17g}"


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _nonnegative(text):
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return value


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _load(args, with_measure=True):
    space = spaces.read_space(args.space, tol_metric=args.tol_metric)
    if not with_measure:
        return space, None
    return space, spaces.read_measure(args.measure, space.n)


def _write_json(data, path):
    text = json.dumps(data)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text)


# -- subcommands --------------------------------------------------------------


def cmd_space(args):
    if args.kind == "circle":
        space = spaces.build_circle(args.m)
    elif args.kind == "sphere":
        space = spaces.build_sphere_grid(args.lat, args.lon)
    elif args.kind == "interval":
        space = spaces.build_interval(args.m)
    else:
        with open(args.edges, encoding="utf-8") as fh:
            data = json.load(fh)
        try:
            edges, n, m = data["edges"], int(data["n"]), data.get("m")
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgumentError(f"malformed edge file: {exc}") from exc
        space = spaces.build_graph(edges, n, m)
    report = spaces.validate(space, tol_metric=args.tol_metric)
    print(f"n={space.n} diameter={_fmt(space.diameter)} validation={report}")
    if not report.ok:
        return EXIT_VALIDATION
    _write_json(space.to_dict(), args.out)
    return EXIT_OK


def cmd_barycenter(args):
    space, mu = _load(args)
    res = canonical_barycenter(space, mu, tol_b=args.tol_b, tol_tie=args.tol_tie)
    print(f"|b(mu)|={res.b_set.size}")
    print(f"|supp B|={res.B.support().size}")
    print(f"d0={_fmt(res.d0)}")
    print(f"var(mu)={_fmt(variance(space, mu, args.tol_b)[0])}")
    print(f"var(B(mu))={_fmt(variance(space, res.B, args.tol_b)[0])}")
    if args.out:
        _write_json(res.to_dict(), args.out)
    return EXIT_OK


def cmd_sweep(args):
    space, mu = _load(args)
    try:
        path = epsilon_sweep(
            space,
            mu,
            eps0=args.eps0,
            ratio=args.ratio,
            max_steps=args.max_steps,
            gap_tol=args.gap_tol,
            snap=not args.no_snap,
            tol_b=args.tol_b,
            tol_tie=args.tol_tie,
        )
        code = EXIT_OK
    except ConvergenceError as exc:
        path = exc.path
        code = EXIT_CONVERGENCE
        print(f"convergence failure: {exc}", file=sys.stderr)
    if args.out:
        path.write_csv(args.out)
    print(f"steps={len(path.steps)} final_gap={_fmt(path.final_gap)}")
    return code


def cmd_orbit(args):
    space, mu = _load(args)
    report = orbit(
        space, mu, max_iter=args.max_iter, match_tol=args.match_tol, tol_b=args.tol_b, tol_tie=args.tol_tie
    )
    if args.out:
        report.write_csv(args.out)
    if args.json:
        report.write_json(args.json)
    print(f"iterates={len(report.iterates)} period={report.period} entry={report.entry_index}")
    try:
        variance_sequence(report)
    except PropertyFailure as exc:
        print(f"theory violation: {exc}", file=sys.stderr)
        return EXIT_THEORY
    if report.period is not None and report.period > 2:
        print(f"theory violation: period {report.period} > 2", file=sys.stderr)
        return EXIT_THEORY
    return EXIT_OK


def cmd_w2(args):
    space, mu = _load(args)
    nu = spaces.read_measure(args.other, space.n)
    plan = solve_ot(space, mu, nu)
    print(_fmt(plan.cost**0.5))
    if args.out:
        _write_json(plan.to_dict(), args.out)
    return EXIT_OK


def cmd_variance(args):
    space, mu = _load(args)
    value, argmin = variance(space, mu, args.tol_b)
    print(f"variance={_fmt(value)}")
    print(f"argmin={argmin.tolist()}")
    return EXIT_OK


def cmd_check(args):
    if args.trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    extra = [spaces.read_space(p, check=False) for p in args.space or ()]
    results = run_suite(args.seed, args.trials, extra_spaces=extra)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_SUITE
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-b", type=_nonnegative, default=None, help="barycenter-set tolerance")
    common.add_argument("--tol-tie", type=_nonnegative, default=None, help="nearest-point tie tolerance")
    common.add_argument("--tol-metric", type=_nonnegative, default=None, help="triangle-inequality tolerance")
    common.add_argument("--gap-tol", type=_nonnegative, default=1e-10, help="sweep convergence tolerance")
    common.add_argument("--match-tol", type=_positive, default=None, help="orbit cycle-matching tolerance")
    common.add_argument("--seed", type=_seed, default=None, help="64-bit seed")
    common.add_argument("--out", default=None, help="output path")

    parser = argparse.ArgumentParser(prog="regbary", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("space", parents=[common], help="build a space file")
    p.add_argument("kind", choices=["circle", "sphere", "interval", "graph"])
    p.add_argument("--m", type=int, help="point count (circle, interval)")
    p.add_argument("--lat", type=int, help="interior latitude rings (sphere)")
    p.add_argument("--lon", type=int, help="longitudes per ring (sphere)")
    p.add_argument("--edges", help='edge file {"n": int, "edges": [[i, j, length]], "m": [...]}')
    p.set_defaults(func=cmd_space)

    def with_measure(name, help_text, func):
        q = sub.add_parser(name, parents=[common], help=help_text)
        q.add_argument("space")
        q.add_argument("measure")
        q.set_defaults(func=func)
        return q

    with_measure("barycenter", "compute B(mu)", cmd_barycenter)

    q = with_measure("sweep", "epsilon sweep towards B(mu)", cmd_sweep)
    q.add_argument("--eps0", type=_positive, default=1.0)
    q.add_argument("--ratio", type=float, default=0.5)
    q.add_argument("--max-steps", type=int, default=200)
    q.add_argument("--no-snap", action="store_true", help="use raw barycentric costs")

    q = with_measure("orbit", "iterate mu -> B(mu)", cmd_orbit)
    q.add_argument("--max-iter", type=int, default=50)
    q.add_argument("--json", default=None, help="JSON sidecar with full iterates")

    q = with_measure("w2", "Wasserstein distance between two measures", cmd_w2)
    q.add_argument("other")

    with_measure("variance", "variance of a measure", cmd_variance)

    p = sub.add_parser("check", parents=[common], help="run the property suite")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--space", action="append", help="extra space file to include (not validated on load)")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "check" and args.seed is None:
        parser.error("check requires --seed")
    if args.command == "space":
        needed = {"circle": ["m"], "interval": ["m"], "sphere": ["lat", "lon"], "graph": ["edges"]}[args.kind]
        missing = [f"--{k}" for k in needed if getattr(args, k) is None]
        if missing:
            parser.error(f"space {args.kind} requires {', '.join(missing)}")
    try:
        return args.func(args)
    except (ValidationError, NoFiniteMetricError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InvalidArgumentError, OSError, json.JSONDecodeError) as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
