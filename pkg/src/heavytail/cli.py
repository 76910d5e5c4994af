"""Command-line entry point.

Exit codes:
  0  success
  2  usage error (bad flags or parameters)
  3  input error (unreadable file, bad header, no usable records)
  4  computation error (fit, test or solver failure; infeasible problem)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import DistributionSpec, sample
from .errors import ComputationError, ConfigError, DomainError, InfeasibleError, InputError
from .gof import DEFAULT_REPLICATES
from .ingest import DEFAULT_FLOOR, Sample, standardize
from .maxent import MaxEntProblem, generate_synthetic, level_grid, solve
from .report import AnalysisConfig, analyze_file, write_outputs
from .synthetic import DatasetSpec, make_records, records_to_csv
from .tailfit import (
    DEFAULT_CUTOFF,
    DEFAULT_TOP_K,
    fit_exponential,
    fit_power_mle,
    fit_power_regression,
    select_tail,
)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_COMPUTATION = 0, 2, 3, 4


def parse_levels(text: str) -> np.ndarray:
    """``1,2,3`` or ``linear:lo:hi:num`` or ``log:lo:hi:num``."""
    if ":" in text:
        spacing, lo, hi, num = text.split(":")
        return level_grid(float(lo), float(hi), int(num), spacing)
    return np.array([float(v) for v in text.split(",")])


def _write_text(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_analyze(args) -> int:
    config = AnalysisConfig(
        seed=args.seed,
        floor=args.floor,
        cutoff=args.cutoff,
        replicates=args.replicates,
        top_k=args.top_k,
        refit=args.refit,
        bootstrap_method=args.bootstrap_fit,
        delimiter=args.delimiter,
        workers=args.workers,
    )
    report, plots = analyze_file(args.input, config)
    write_outputs(args.out_dir, report, plots)
    for name in ("revenues", "spendings"):
        fits = report["series"][name]["fits"]
        boot = report["series"][name]["bootstrap"]
        print(
            f"{name}: alpha_mle={fits['mle']['exponent']:.4f} "
            f"alpha_reg={fits['regression']['exponent']:.4f} "
            f"gamma={report['series'][name]['zipf']['gamma']:.4f} p={boot['p_value']:.4f}"
        )
    beta = report["series"]["bidders"]["fits"]["regression"]["exponent"]
    print(f"bidders: beta={beta:.4f}")
    return EXIT_OK


def _maxent_problem(args) -> MaxEntProblem:
    if args.levels is None or args.target is None:
        raise ConfigError("--levels and --target are required")
    try:
        levels = parse_levels(args.levels)
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"cannot read levels {args.levels!r}: {exc}") from exc
    return MaxEntProblem(levels, args.target, args.entropy, args.q)


def cmd_simulate(args) -> int:
    family = args.family
    try:
        if family == "pareto":
            spec = DistributionSpec.pareto(args.alpha, args.x_min if args.x_min is not None else 1.0)
        elif family == "exponential":
            spec = DistributionSpec.exponential(args.beta, args.x_min or 0.0)
        elif family == "q_exponential":
            spec = DistributionSpec.q_exponential(args.q, args.scale, args.x_min or 0.0)
        else:
            spec = None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {family} parameters: {exc}") from exc
    if args.n < 1:
        raise ConfigError("-n must be at least 1")
    if spec is not None:
        out = sample(spec, args.n, args.seed)
    else:
        args.entropy = "shannon" if family == "boltzmann" else "tsallis"
        out = generate_synthetic(solve(_maxent_problem(args)), args.n, args.seed)
    _write_text(args.output, out.to_text())
    return EXIT_OK


def cmd_fit(args) -> int:
    values = Sample.from_text(Path(args.input).read_text())
    if args.family == "exponential":
        fits = [fit_exponential(values, fixed_intercept_at=args.fixed_intercept), fit_exponential(values)]
        result = {"fits": [f.as_dict() for f in fits]}
    else:
        scale = None
        if args.standardize:
            values, scale = standardize(values)
        tail = select_tail(values, args.cutoff)
        result = {
            "scale": scale,
            "n_tail": tail.n_tail,
            "fits": [fit_power_mle(tail).as_dict(), fit_power_regression(tail).as_dict()],
        }
    _write_text(args.output, json.dumps(result, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_maxent(args) -> int:
    solution = solve(_maxent_problem(args))
    _write_text(args.output, json.dumps(solution.as_dict(), indent=2, sort_keys=True) + "\n")
    if args.tsv:
        Path(args.tsv).write_text(solution.to_tsv())
    return EXIT_OK


def cmd_dataset(args) -> int:
    spec = DatasetSpec(
        n_suppliers=args.suppliers,
        n_authorities=args.authorities,
        revenue_alpha=args.revenue_alpha,
        spending_alpha=args.spending_alpha,
        bidder_kappa=args.bidder_kappa,
        floor=args.floor,
    )
    _write_text(args.output, records_to_csv(make_records(spec, args.seed)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heavytail",
        description=__doc__.splitlines()[0],
        epilog="exit codes: 0 success, 2 usage, 3 input, 4 computation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the full pipeline on a tender register")
    p.add_argument("--input", required=True)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--floor", type=float, default=DEFAULT_FLOOR)
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF, help="tail cutoff in standard deviations")
    p.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    p.add_argument("--top-k", type=int, default=DEFAULT_TOP_K)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--refit", action="store_true", help="re-estimate the exponent on every replicate")
    p.add_argument("--bootstrap-fit", choices=("mle", "regression"), default="mle")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_analyze)

    def add_maxent_args(p):
        p.add_argument("--levels", help="comma list, or linear:lo:hi:num / log:lo:hi:num")
        p.add_argument("--target", type=float, help="target mean level")
        p.add_argument("--q", type=float, help="entropic index (Tsallis)")

    p = sub.add_parser("simulate", help="draw a sample, one value per line")
    p.add_argument(
        "--family",
        required=True,
        choices=("pareto", "exponential", "q_exponential", "boltzmann", "tsallis"),
    )
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--scale", type=float)
    p.add_argument("--x-min", type=float)
    add_maxent_args(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a tail law to a one-value-per-line sample")
    p.add_argument("--input", required=True)
    p.add_argument("--family", choices=("pareto", "exponential"), default="pareto")
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--fixed-intercept", type=float, default=1.0)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("maxent", help="solve a maximum-entropy problem")
    add_maxent_args(p)
    p.add_argument("--entropy", choices=("shannon", "tsallis"), default="shannon")
    p.add_argument("--output", default="-")
    p.add_argument("--tsv", help="also write level/probability plot data here")
    p.set_defaults(func=cmd_maxent)

    p = sub.add_parser("dataset", help="write a synthetic tender register with known laws")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--suppliers", type=int, default=DatasetSpec.n_suppliers)
    p.add_argument("--authorities", type=int, default=DatasetSpec.n_authorities)
    p.add_argument("--revenue-alpha", type=float, default=DatasetSpec.revenue_alpha)
    p.add_argument("--spending-alpha", type=float, default=DatasetSpec.spending_alpha)
    p.add_argument("--bidder-kappa", type=float, default=DatasetSpec.bidder_kappa)
    p.add_argument("--floor", type=float, default=DEFAULT_FLOOR)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_dataset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    except ComputationError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
