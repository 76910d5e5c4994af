"""Synthetic tender registers with known generating laws.

Supplier revenues and authority spendings are drawn from Tsallis
maximum-entropy solutions on an integer level grid, bidder counts from a
Boltzmann solution.  Revenues and spendings are then matched into
individual tenders with a north-west-corner transport plan in integer
currency units, so per-entity sums reproduce the drawn totals exactly.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass

import numpy as np

from .distributions import stream
from .ingest import DEFAULT_FLOOR, ProcurementRecord
from .maxent import MaxEntProblem, MaxEntSolution, generate_synthetic, solve_shannon, solve_tsallis


def tsallis_index_for_tail(alpha: float) -> float:
    """Entropic index whose maxent solution has tail exponent ``alpha`` on a uniform grid."""
    return alpha / (alpha + 1.0)


def power_law_solution(alpha: float, n_levels: int, shift: float = 2.0) -> MaxEntSolution:
    """Tsallis solution on levels ``1..n_levels`` with probabilities ~ ``(shift + m - 1) ** -(alpha + 1)``.

    The target mean is evaluated from that form first, then handed to the
    solver, which recovers the same vector.
    """
    levels = np.arange(1, n_levels + 1, dtype=float)
    w = (shift + levels - 1) ** (-(alpha + 1))
    target = float(w @ levels / w.sum())
    return solve_tsallis(MaxEntProblem(levels, target, "tsallis", tsallis_index_for_tail(alpha)))


def boltzmann_solution(kappa: float, max_level: int = 60) -> MaxEntSolution:
    levels = np.arange(1, max_level + 1, dtype=float)
    w = np.exp(-kappa * (levels - 1))
    target = float(w @ levels / w.sum())
    return solve_shannon(MaxEntProblem(levels, target))


@dataclass(frozen=True)
class DatasetSpec:
    n_suppliers: int = 100_000
    n_authorities: int = 100_000
    revenue_alpha: float = 1.24
    spending_alpha: float = 1.0
    bidder_kappa: float = 0.27
    n_levels: int = 20_000
    floor: float = DEFAULT_FLOOR


def _transport(supply: np.ndarray, demand: np.ndarray):
    """North-west-corner plan between two integer vectors with equal sums."""
    i = j = 0
    s, d = int(supply[0]), int(demand[0])
    while True:
        amount = min(s, d)
        yield j, i, amount
        s -= amount
        d -= amount
        if s == 0:
            i += 1
            if i == supply.size:
                return
            s = int(supply[i])
        if d == 0:
            j += 1
            if j == demand.size:
                return
            d = int(demand[j])


def make_records(spec: DatasetSpec, seed: int) -> list[ProcurementRecord]:
    revenue_levels = generate_synthetic(
        power_law_solution(spec.revenue_alpha, spec.n_levels), spec.n_suppliers, seed
    ).values
    spending_levels = generate_synthetic(
        power_law_solution(spec.spending_alpha, spec.n_levels), spec.n_authorities, seed + 1
    ).values

    # currency unit keeps every drawn total at or above the floor
    ratio = revenue_levels.sum() / spending_levels.sum()
    unit = spec.floor * max(1.0, 1.0 / ratio)
    revenues = np.rint(revenue_levels * unit).astype(np.int64)
    spendings = np.rint(spending_levels * ratio * unit).astype(np.int64)
    spendings[np.argmax(spendings)] += revenues.sum() - spendings.sum()

    rng = stream(seed, 2)
    revenues = revenues[rng.permutation(revenues.size)]
    spendings = spendings[rng.permutation(spendings.size)]

    plan = list(_transport(revenues, spendings))
    bidders = generate_synthetic(boltzmann_solution(spec.bidder_kappa), len(plan), seed + 3).values
    start = dt.date(2006, 6, 1)
    return [
        ProcurementRecord(
            tender_id=f"T{k:07d}",
            authority_id=f"A{a:06d}",
            winner_id=f"W{w:06d}",
            price=float(amount),
            n_bidders=int(b),
            date=start + dt.timedelta(days=k % 1900),
        )
        for k, ((a, w, amount), b) in enumerate(zip(plan, bidders))
    ]


def records_to_csv(records: list[ProcurementRecord], delimiter: str = ",") -> str:
    out = io.StringIO()
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(["tender_id", "authority_id", "winner_id", "price", "n_bidders", "date"])
    for r in records:
        writer.writerow([
            r.tender_id,
            r.authority_id,
            r.winner_id,
            f"{r.price:.0f}",
            r.n_bidders,
            "" if r.date is None else r.date.isoformat(),
        ])
    return out.getvalue()
