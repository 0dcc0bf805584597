"""Command-line front end: ``bondlab gen|gamma|bondage|damage|formulas|exp``.

Data goes to stdout (or ``--out``), diagnostics to stderr. Exit codes:
0 success, 1 domain or usage error, 2 capacity exceeded, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import secrets
import sys
from contextlib import contextmanager
from typing import Sequence, TextIO

from . import __version__
from .bondage import bondage_bounds, bondage_exact, certified_lower_bound, damage_table
from .domination import DEFAULT_CAP, count_dominating_sets, enumerate_min_sets, gamma_exact
from .errors import CapacityError, DomainError
from .experiments import KINDS, ExperimentSpec, _jsonable, render_results, run_experiment, write_results
from .formulas import DEFAULT_EPSILON, FormulaContext, expected_damage, log_f, r_closed_form
from .graph import RandomSource, format_edge_list, process_stream, read_graph, sample_gnm, sample_gnp

EXIT_OK, EXIT_DOMAIN, EXIT_CAPACITY, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "BONDLAB_SEED"

DAMAGE_HEADER = [
    "u", "v", "direction", "Z_num", "Z_den", "Z_light_num", "Z_light_den",
    "Z_heavy_num", "Z_heavy_den", "j_breakdown",
]


class UsageError(DomainError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which we reserve for capacity errors
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env, 0)
        except ValueError:
            raise DomainError(f"{SEED_ENV}={env!r} is not an integer") from None
    return secrets.randbits(63)


@contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        yield fh


def _load(path: str):
    try:
        return read_graph(path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read graph {path}: {exc.strerror}") from exc


# -- subcommands ----------------------------------------------------------------------


def cmd_gen(args, seed: int, out: TextIO) -> int:
    rng = RandomSource(seed, args.stream)
    if args.process:
        stream = process_stream(args.n, rng)
        out.write(_dumps({"n": args.n, "stream": [list(e) for e in stream]}) + "\n")
        return EXIT_OK
    g = sample_gnp(args.n, args.p, rng) if args.p is not None else sample_gnm(args.n, args.m, rng)
    if args.format == "edges":
        out.write(format_edge_list(g))
    else:
        out.write(_dumps(g.to_dict()) + "\n")
    return EXIT_OK


def cmd_gamma(args, seed: int, out: TextIO) -> int:
    g = _load(args.graph)
    if args.enumerate:
        sets, overflow = enumerate_min_sets(g, args.cap)
        for d in sets:
            out.write(f"{d:x}\n")
        if overflow:
            print(f"more than {args.cap} minimum dominating sets; output truncated", file=sys.stderr)
            return EXIT_CAPACITY
        return EXIT_OK
    gamma = gamma_exact(g)
    result: dict = {"gamma": gamma, "X_gamma": count_dominating_sets(g, gamma)}
    if args.k:
        result["X_k"] = {str(k): count_dominating_sets(g, k) for k in sorted(set(args.k))}
    out.write(_dumps(result) + "\n")
    return EXIT_OK


def cmd_bondage(args, seed: int, out: TextIO) -> int:
    g = _load(args.graph)
    if args.mode == "exact":
        res = bondage_exact(g, limit=args.limit, prune=not args.no_prune, cap=args.cap)
    elif args.mode == "bounds":
        res = bondage_bounds(g, cap=args.cap)
    else:
        res = certified_lower_bound(g, cap=args.cap)
    out.write(_dumps(res.to_dict()) + "\n")
    return EXIT_OK


def cmd_damage(args, seed: int, out: TextIO) -> int:
    g = _load(args.graph)
    table = damage_table(g, r=args.r, L=args.L, all_pairs=args.all_pairs, cap=args.cap)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DAMAGE_HEADER)
    # one row per direction; "uv" is the damage of u->v for the listed u < v
    lines = []
    for u, v, z, light, heavy, buckets in table.rows():
        breakdown = ";".join(f"{j}:{c}" for j, c in buckets.items())
        lines.append([
            min(u, v), max(u, v), "uv" if u < v else "vu", z.numerator, z.denominator,
            light.numerator, light.denominator, heavy.numerator, heavy.denominator, breakdown,
        ])
    lines.sort(key=lambda row: (row[0], row[1], row[2]))
    writer.writerows(lines)
    return EXIT_OK


def cmd_formulas(args, seed: int, out: TextIO) -> int:
    ctx = FormulaContext.build(args.n, args.p, args.epsilon, r=args.r)
    try:
        closed = r_closed_form(args.n, args.p)
    except DomainError:
        closed = None
    result = {
        "n": ctx.n,
        "p": ctx.p,
        "epsilon": ctx.epsilon,
        "p_hat": ctx.p_hat,
        "r": ctx.r,
        "r_closed_form": closed,
        "L": ctx.L,
        "log_f_at_r": log_f(ctx.n, ctx.r, ctx.p),
        "log_one_over_pn": -math.log(ctx.p * ctx.n),
        "expected_damage_log": expected_damage(ctx),
    }
    out.write(_dumps(_jsonable(result)) + "\n")
    return EXIT_OK


def cmd_exp(args, seed: int, out: TextIO) -> int:
    spec = ExperimentSpec(
        kind=args.kind, n=args.n, p=args.p, m=args.m, k=args.k, samples=args.samples,
        seed=seed, epsilon=args.epsilon, cap=args.cap, limit=args.limit,
        every_step=args.every_step, pair=tuple(args.pair),
    )
    result = run_experiment(spec, workers=args.workers)
    if args.out is not None:
        meta_path = write_results(result, args.out, args.format, include_timing=args.timing)
        print(f"wrote {args.out} and {meta_path}", file=sys.stderr)
    else:
        out.write(render_results(result, args.format, include_timing=args.timing))
    print(_dumps(_jsonable(result.summary)), file=sys.stderr)
    if result.violations:
        print(f"{result.violations} exact check(s) failed", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------------


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {value}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bondlab", description="Domination and bondage numbers of (random) graphs.")
    parser.add_argument("--version", action="version", version=f"bondlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def common(p, with_out=True):
        p.add_argument("--seed", type=int, help=f"random seed (default: ${SEED_ENV}, else fresh entropy)")
        if with_out:
            p.add_argument("--out", metavar="PATH", help="write data to PATH instead of stdout")

    p = sub.add_parser("gen", help="sample a random graph or edge process")
    p.add_argument("--n", type=int, required=True, help="number of vertices")
    model = p.add_mutually_exclusive_group(required=True)
    model.add_argument("--p", type=_probability, help="edge probability, G(n, p)")
    model.add_argument("--m", type=int, help="edge count, G(n, m)")
    model.add_argument("--process", action="store_true", help="emit a random ordering of all pairs")
    p.add_argument("--stream", type=int, default=0, help="stream index derived from the seed (default 0)")
    p.add_argument("--format", choices=("json", "edges"), default="json", help="graph file format")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("gamma", help="domination number and counts of dominating sets")
    p.add_argument("graph", help="graph file (JSON or edge list)")
    p.add_argument("--k", type=int, action="append", help="also report X_k (repeatable)")
    p.add_argument("--enumerate", action="store_true", help="print every minimum dominating set as a hex bitmask")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP, help="enumeration limit")
    common(p)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("bondage", help="bondage number: exact value, upper bounds or certified lower bound")
    p.add_argument("graph", help="graph file (JSON or edge list)")
    p.add_argument("--mode", choices=("exact", "bounds", "certify"), default="exact", help="what to compute (default exact)")
    p.add_argument("--limit", type=_positive, help="largest removal-set size to try in exact mode")
    p.add_argument("--no-prune", action="store_true", help="test every removal set (exact mode)")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP, help="enumeration limit")
    common(p)
    p.set_defaults(func=cmd_bondage)

    p = sub.add_parser("damage", help="CSV of directed damages of a graph")
    p.add_argument("graph", help="graph file (JSON or edge list)")
    p.add_argument("--r", type=_positive, help="dominating-set size (default: domination number)")
    p.add_argument("--L", type=int, default=0, help="heavy/light threshold (default 0)")
    p.add_argument("--all-pairs", action="store_true", help="include non-adjacent pairs")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP, help="enumeration limit")
    common(p)
    p.set_defaults(func=cmd_damage)

    p = sub.add_parser("formulas", help="closed-form quantities for G(n, p)")
    p.add_argument("--n", type=int, required=True, help="number of vertices")
    p.add_argument("--p", type=_probability, required=True, help="edge probability")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="heavy/light constant (default 0.1)")
    p.add_argument("--r", type=_positive, help="override the computed r")
    common(p)
    p.set_defaults(func=cmd_formulas)

    p = sub.add_parser("exp", help="seeded Monte Carlo experiments")
    p.add_argument("kind", choices=KINDS, help="experiment to run")
    p.add_argument("--n", type=int, required=True, help="number of vertices")
    p.add_argument("--p", type=_probability, help="edge probability (all kinds but process)")
    p.add_argument("--m", type=int, help="process only: stop after m edges")
    p.add_argument("--k", type=_positive, help="set size (moments; overrides r for damage_mean, profile)")
    p.add_argument("--samples", type=_positive, default=1, help="number of replicates (default 1)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="heavy/light constant (default 0.1)")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP, help="enumeration limit")
    p.add_argument("--limit", type=_positive, help="process only: exact bondage search depth")
    p.add_argument("--every-step", action="store_true", help="process only: bounds after every edge")
    p.add_argument("--pair", type=int, nargs=2, default=(0, 1), metavar=("U", "V"),
                   help="damage_mean only: directed pair (default 0 1)")
    p.add_argument("--workers", type=_positive, default=1, help="worker processes")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv", help="record format (default csv)")
    p.add_argument("--timing", action="store_true", help="add a wall_time column")
    common(p)
    p.set_defaults(func=cmd_exp)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        seed = resolve_seed(getattr(args, "seed", None))
        print(f"seed: {seed}", file=sys.stderr)
        if args.command == "exp":
            return args.func(args, seed, sys.stdout)
        with _sink(args.out) as out:
            return args.func(args, seed, out)
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
