"""End-to-end analysis of a tender register into a report and plot data."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .concentration import gini, pareto_rule_check, top_share
from .errors import ComputationError, HeavyTailError
from .gof import DEFAULT_REPLICATES, RefitMode, bootstrap_test
from .ingest import DEFAULT_FLOOR, Sample, aggregate, parse_records, standardize
from .tailfit import (
    DEFAULT_CUTOFF,
    DEFAULT_TOP_K,
    Method,
    empirical_tail,
    fit_exponential,
    fit_power_mle,
    fit_power_regression,
    fit_zipf,
    select_tail,
)

SCHEMA_VERSION = "1.0"
TOP_FRACTIONS = (0.01, 0.1, 0.2)
PLOT_FILES = (
    "fig1_cdf.tsv",
    "fig1_pdf.tsv",
    "fig2_cdf.tsv",
    "fig2_zipf.tsv",
    "fig3_cdf.tsv",
    "fig3_zipf.tsv",
)

# Published values for the Czech register, 6/2006-8/2011; annotations only.
REFERENCE = {
    "bidders": {"exponent_beta": 0.27, "share_at_most_10": 0.95},
    "revenues": {
        "alpha": 1.236,
        "gamma": 0.789,
        "ks": 0.0014,
        "p_value": 0.3820,
        "top_share": {"0.01": 0.45, "0.1": 0.80},
    },
    "spendings": {
        "alpha": 0.993,
        "gamma": 0.977,
        "ks": 0.0007,
        "p_value": 0.7541,
        "top_share": {"0.01": 0.60, "0.1": 0.87},
    },
}


@dataclass(frozen=True)
class AnalysisConfig:
    seed: int
    floor: float = DEFAULT_FLOOR
    cutoff: float = DEFAULT_CUTOFF
    replicates: int = DEFAULT_REPLICATES
    top_k: int = DEFAULT_TOP_K
    refit: bool = False
    bootstrap_method: str = "mle"
    delimiter: str = ","
    workers: int = 1


class SeriesError(ComputationError):
    def __init__(self, series: str, cause: Exception):
        super().__init__(f"{series}: {cause}")
        self.series = series
        self.cause = cause


def _clean(obj):
    """Replace non-finite floats by None so the document stays valid JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _series_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed & ((1 << 64) - 1), index]).generate_state(1, np.uint64)[0])


def _tsv(header: tuple[str, str], xs, ys) -> str:
    rows = [f"{float(x)!r}\t{float(y)!r}" for x, y in zip(xs, ys)]
    return "\t".join(header) + "\n" + "\n".join(rows) + "\n"


def _concentration(sample: Sample) -> dict:
    return {
        "gini": gini(sample),
        "p80": pareto_rule_check(sample),
        "top_share": {f"{f:g}": top_share(sample, f) for f in TOP_FRACTIONS},
    }


def _bidder_block(bidders: Sample):
    regression = fit_exponential(bidders, fixed_intercept_at=1.0)
    mle = fit_exponential(bidders)
    beta = regression.exponent
    levels, counts = np.unique(bidders.values, return_counts=True)
    n = len(bidders)
    tail = (n - np.concatenate(([0], np.cumsum(counts)[:-1]))) / n
    block = {
        "n": n,
        "fits": {"regression": regression.as_dict(), "mle": mle.as_dict()},
        "share_at_most_10": float(np.count_nonzero(bidders.values <= 10) / n),
        "model_share_at_most_10": -math.expm1(-beta * 10.0),
        "zipf": None,
        "bootstrap": None,
        "concentration": _concentration(bidders),
        "reference": REFERENCE["bidders"],
    }
    plots = {
        "fig1_cdf.tsv": _tsv(("bidders", "tail_probability"), levels, tail),
        "fig1_pdf.tsv": _tsv(("bidders", "probability"), levels, counts / n),
    }
    return block, plots


def _power_block(name: str, sample: Sample, config: AnalysisConfig, seed: int, figure: int):
    standardized, scale = standardize(sample)
    tail = select_tail(standardized, config.cutoff)
    fits = {"mle": fit_power_mle(tail), "regression": fit_power_regression(tail)}
    zipf = fit_zipf(sample, config.top_k)
    boot = bootstrap_test(
        tail,
        fits[Method(config.bootstrap_method).value],
        n_replicates=config.replicates,
        seed=seed,
        refit_mode=RefitMode.REFIT if config.refit else RefitMode.FIXED,
        workers=config.workers,
    )
    block = {
        "n": len(sample),
        "scale": scale,
        "tail": {"cutoff": tail.cutoff, "n_tail": tail.n_tail, "n_total": tail.n_total},
        "fits": {k: v.as_dict() for k, v in fits.items()},
        "zipf": zipf.as_dict(),
        "bootstrap": {"fit_method": config.bootstrap_method, **boot.as_dict()},
        "concentration": _concentration(sample),
        "reference": REFERENCE[name],
    }
    x = np.sort(standardized.values)
    ranked = np.sort(sample.values)[::-1]
    plots = {
        f"fig{figure}_cdf.tsv": _tsv((f"{name}_sd", "tail_probability"), x, empirical_tail(x)),
        f"fig{figure}_zipf.tsv": _tsv(("rank", name), np.arange(1, ranked.size + 1), ranked),
    }
    return block, plots


def analyze_records(records, config: AnalysisConfig, rejected: int = 0):
    """Run the full pipeline; returns ``(report, plots)`` with plots keyed by file name."""
    revenues, spendings, bidders, summary = aggregate(records, config.floor)
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "seed": config.seed,
        # worker count is excluded: it must not change the document
        "config": {k: v for k, v in asdict(config).items() if k != "workers"},
        "summary": {**summary.as_dict(), "rejected_rows": rejected},
        "series": {},
    }
    plots: dict[str, str] = {}
    jobs = [
        ("bidders", lambda: _bidder_block(bidders)),
        ("revenues", lambda: _power_block("revenues", revenues, config, _series_seed(config.seed, 1), 2)),
        ("spendings", lambda: _power_block("spendings", spendings, config, _series_seed(config.seed, 2), 3)),
    ]
    for name, job in jobs:
        if name != "bidders" and (revenues if name == "revenues" else spendings) is None:
            raise SeriesError(name, ComputationError(f"no entity reaches the floor {config.floor}"))
        try:
            block, series_plots = job()
        except HeavyTailError as exc:
            raise SeriesError(name, exc) from exc
        report["series"][name] = block
        plots.update(series_plots)
    return _clean(report), plots


def analyze_file(path, config: AnalysisConfig):
    records, rejected = parse_records(Path(path), delimiter=config.delimiter)
    return analyze_records(records, config, rejected=len(rejected))


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_schema() -> dict:
    return json.loads(Path(__file__).with_name("report_schema.json").read_text())


def write_outputs(out_dir, report: dict, plots: dict[str, str]) -> None:
    """Write everything to a staging directory first, then move files into place."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {"report.json": dumps(report), **plots}
    with tempfile.TemporaryDirectory(dir=out_dir, prefix=".staging-") as staging:
        for name, text in files.items():
            (Path(staging) / name).write_text(text)
        for name in files:
            os.replace(Path(staging) / name, out_dir / name)
