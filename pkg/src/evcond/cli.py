"""Command-line interface.

Exit codes: 0 when the hypothesis is not rejected (or the command has no
verdict), 1 when it is rejected, 2 on any input or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import rng as streams
from .estimators import exponent_measure
from .limit import TABLE1_PROBS, Mesh, estimated_plan, limit_quantiles
from .limit.functionals import BOUNDARY_MODES
from .models import SAMPLERS
from .report import (
    default_k_list,
    run_test,
    scan,
    scan_svg,
    table1,
    table1_csv,
    table2,
    table2_csv,
)
from .sample import (
    ConfigError,
    SampleFormatError,
    TestConfig,
    compute_ranks,
    dumps_sample,
    load_sample,
)
from .statistic import QuadSpec

EXIT_ACCEPT, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}")


def _common(p: argparse.ArgumentParser, k: bool = True) -> None:
    if k:
        p.add_argument("--k", type=int, default=100, help="number of tail observations")
    p.add_argument("--beta", type=float, default=2.0, help="weight exponent in [0, 3)")
    p.add_argument("--alpha", type=float, default=0.05, help="test level")
    p.add_argument("--reps", type=int, default=10_000, help="Monte-Carlo replicates")
    p.add_argument("--grid", type=int, default=200, help="quadrature cells per axis")
    p.add_argument("--theta-grid", type=int, default=200, help="angular cells (even)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count; $EVCOND_THREADS caps it)")
    p.add_argument(
        "--boundary",
        choices=BOUNDARY_MODES,
        default="renormalize",
        help="normalisation of smoothing windows clamped at the axes",
    )


def _sample_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("sample", help="two-column text file, '-' for stdin")
    p.add_argument("--skip-header", action="store_true", help="ignore the first non-comment line")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evcond", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="test one sample at one k")
    _sample_args(p)
    _common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")

    p = sub.add_parser("scan", help="statistic and critical value over a list of k")
    _sample_args(p)
    _common(p, k=False)
    p.add_argument("--k-list", type=_int_list, default=None, help="e.g. 50,100,150")
    p.add_argument("--no-quantile", action="store_true", help="skip the simulated quantiles")
    p.add_argument("--svg", type=Path, default=None, help="write a plot to this path")

    p = sub.add_parser("quantiles", help="simulated quantiles of the limit for one sample")
    _sample_args(p)
    _common(p)
    p.add_argument("--probs", type=_float_list, default=list(TABLE1_PROBS))
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("table1", help="limit quantiles for the Cauchy model")
    p.add_argument("--betas", type=_float_list, default=[0.0, 1.0, 2.0])
    p.add_argument("--reps", type=int, default=20_000)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--theta-grid", type=int, default=200)
    p.add_argument("--mesh", type=int, default=100, help="analytic mesh cells per unit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("table2", help="type-I error over simulated Cauchy samples")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--k-list", type=_int_list, default=[100])
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--reps", type=int, default=300, help="number of simulated samples")
    p.add_argument("--q95", type=float, default=None, help="critical value; simulated from the Cauchy limit if omitted")
    p.add_argument("--limit-reps", type=int, default=10_000, help="replicates for the simulated critical value")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("gen", help="draw a sample from a reference model")
    p.add_argument("model", choices=sorted(SAMPLERS))
    p.add_argument("n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=float, default=10.0, help="Gumbel dependence parameter")
    p.add_argument("-o", "--output", type=Path, default=None)
    return parser


def _load(args):
    source = sys.stdin.buffer if args.sample == "-" else args.sample
    return load_sample(source, skip_header=args.skip_header)


def _config(args, k: int) -> TestConfig:
    return TestConfig(
        k=k,
        beta=args.beta,
        alpha=args.alpha,
        reps=args.reps,
        quad_cells=args.grid,
        theta_cells=args.theta_grid,
        seed=args.seed,
    )


def cmd_run(args) -> int:
    sample = _load(args)
    report = run_test(sample, _config(args, args.k), args.workers, args.timing, args.boundary)
    sys.stdout.write(report.to_json() if args.format == "json" else report.to_csv())
    return EXIT_REJECT if report.reject else EXIT_ACCEPT


def cmd_scan(args) -> int:
    sample = _load(args)
    ks = args.k_list if args.k_list is not None else default_k_list(sample.n)
    if not ks:
        raise ConfigError("no admissible k; pass --k-list")
    curve = scan(sample, ks, _config(args, ks[0]), not args.no_quantile, args.workers, args.boundary)
    sys.stdout.write(curve.to_csv())
    if args.svg is not None:
        args.svg.write_text(scan_svg(curve))
    return EXIT_ACCEPT


def cmd_quantiles(args) -> int:
    sample = _load(args)
    config = _config(args, args.k).validate(sample.n)
    ranks = compute_ranks(sample)
    plan = estimated_plan(
        exponent_measure(ranks, args.k), [args.beta], QuadSpec(args.grid), args.theta_grid,
        args.boundary,
    )
    (table,) = limit_quantiles(
        plan, config.reps, args.probs, config.seed, args.workers, {"k": args.k, "n": sample.n}
    )
    sys.stdout.write(table.to_csv() if args.format == "csv" else table.to_json() + "\n")
    return EXIT_ACCEPT


def cmd_table1(args) -> int:
    for b in args.betas:
        if not 0.0 <= b < 3.0:
            raise ConfigError(f"beta must lie in [0, 3), got {b}")
    tables = table1(
        args.betas,
        args.reps,
        args.seed,
        QuadSpec(args.grid),
        args.theta_grid,
        Mesh(cells_per_unit=args.mesh),
        workers=args.workers,
    )
    if args.format == "csv":
        sys.stdout.write(table1_csv(tables))
    else:
        sys.stdout.write(json.dumps([t.to_dict() for t in tables], sort_keys=True) + "\n")
    return EXIT_ACCEPT


def cmd_table2(args) -> int:
    if not 0.0 <= args.beta < 3.0:
        raise ConfigError(f"beta must lie in [0, 3), got {args.beta}")
    if args.reps < 1:
        raise ConfigError("--reps must be positive")
    critical = args.q95
    if critical is None:
        (t,) = table1([args.beta], args.limit_reps, args.seed, QuadSpec(args.grid), probs=[0.95], workers=args.workers)
        critical = t.quantiles[0]
    rows, _ = table2(args.n, args.k_list, args.beta, args.reps, args.seed, critical, QuadSpec(args.grid))
    sys.stdout.write(f"# critical value {critical!r}\n")
    sys.stdout.write(table2_csv(rows))
    return EXIT_ACCEPT


def cmd_gen(args) -> int:
    if args.n < 1:
        raise ConfigError("n must be positive")
    if args.model == "gumbel" and args.theta < 1:
        raise ConfigError("theta must be at least 1")
    sampler = SAMPLERS[args.model]
    sample = sampler(args.n, streams.stream(args.seed, streams.SAMPLE, 0), theta=args.theta)
    header = [f"model={args.model}", f"n={args.n}", f"seed={args.seed}"]
    if args.model == "gumbel":
        header.append(f"theta={args.theta!r}")
    text = dumps_sample(sample, header)
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
    return EXIT_ACCEPT


COMMANDS = {
    "run": cmd_run,
    "scan": cmd_scan,
    "quantiles": cmd_quantiles,
    "table1": cmd_table1,
    "table2": cmd_table2,
    "gen": cmd_gen,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SampleFormatError as exc:
        print(f"evcond: sample error: {exc}", file=sys.stderr)
    except (ConfigError, ValueError) as exc:
        print(f"evcond: configuration error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"evcond: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
