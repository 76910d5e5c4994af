"""Parsing of tender award records and aggregation into analysis series."""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping, NamedTuple

import numpy as np

from .errors import EmptyInputError, SchemaError, ZeroVarianceError

REQUIRED_COLUMNS = ("tender_id", "authority_id", "winner_id", "price", "n_bidders")
OPTIONAL_COLUMNS = ("date",)

# Entities with totals below this amount are not publicly listed.
DEFAULT_FLOOR = 2e6


class SampleKind(str, enum.Enum):
    REVENUES = "revenues"
    SPENDINGS = "spendings"
    BIDDER_COUNTS = "bidder_counts"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class ProcurementRecord:
    tender_id: str
    authority_id: str
    winner_id: str
    price: float
    n_bidders: int
    date: dt.date | None = None

    def __post_init__(self):
        if not self.tender_id:
            raise ValueError("tender_id must be nonempty")
        if not self.price > 0 or not math.isfinite(self.price):
            raise ValueError(f"price must be positive and finite, got {self.price!r}")
        if self.n_bidders < 1:
            raise ValueError(f"n_bidders must be >= 1, got {self.n_bidders!r}")


@dataclass(frozen=True)
class AggregationSummary:
    total_money: float
    n_suppliers: int
    n_authorities: int
    n_tenders: int
    n_bids_total: int

    def as_dict(self) -> dict:
        return {
            "total_money": self.total_money,
            "n_suppliers": self.n_suppliers,
            "n_authorities": self.n_authorities,
            "n_tenders": self.n_tenders,
            "n_bids_total": self.n_bids_total,
        }


@dataclass(frozen=True, eq=False)
class Sample:
    """An ordered series of strictly positive magnitudes.

    ``labels`` optionally carries the entity id behind each value
    (supplier or authority), aligned with ``values``.
    """

    values: np.ndarray
    kind: SampleKind = SampleKind.SYNTHETIC
    unit: str = ""
    labels: tuple[str, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise EmptyInputError("a sample needs at least one value")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("sample values must be finite and strictly positive")
        if self.labels is not None and len(self.labels) != values.size:
            raise ValueError("labels must align with values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", SampleKind(self.kind))

    def __len__(self) -> int:
        return self.values.size

    def to_text(self) -> str:
        """One value per line, shortest round-trip representation."""
        return "".join(f"{float(v)!r}\n" for v in self.values)

    @classmethod
    def from_text(cls, text: str, kind=SampleKind.SYNTHETIC, unit: str = "") -> "Sample":
        values = [float(line) for line in text.splitlines() if line.strip()]
        if not values:
            raise EmptyInputError("no values found")
        return cls(np.array(values), kind=kind, unit=unit)


class Rejection(NamedTuple):
    line: int
    reason: str


class ParseResult(NamedTuple):
    records: list[ProcurementRecord]
    rejected: list[Rejection]

    @property
    def n_skipped(self) -> int:
        return len(self.rejected)


def _text_stream(source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"), newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def parse_records(
    source: BinaryIO | bytes | str | Path,
    schema: Mapping[str, str] | None = None,
    delimiter: str = ",",
) -> ParseResult:
    """Read delimiter-separated tender rows.

    ``schema`` maps canonical field names (``tender_id``, ``price``, ...)
    to the column headers used in the file; unmapped fields use their
    canonical name. Invalid rows are skipped and reported with a reason,
    row order of accepted records is preserved.
    """
    columns = {name: name for name in REQUIRED_COLUMNS + OPTIONAL_COLUMNS}
    if schema:
        unknown = set(schema) - set(columns)
        if unknown:
            raise SchemaError(f"unknown schema fields: {sorted(unknown)}")
        columns.update(schema)

    stream = _text_stream(source)
    try:
        reader = csv.reader(stream, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("input has no header row") from None
        header = [h.strip().lstrip("﻿") for h in header]
        if len(set(header)) != len(header):
            raise SchemaError("duplicate column names in header")
        missing = [f for f in REQUIRED_COLUMNS if columns[f] not in header]
        if missing:
            raise SchemaError(f"header lacks required columns: {', '.join(missing)}")
        index = {f: header.index(c) for f, c in columns.items() if c in header}

        records: list[ProcurementRecord] = []
        rejected: list[Rejection] = []
        seen: set[str] = set()
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            record_or_reason = _parse_row(row, index, len(header))
            if isinstance(record_or_reason, str):
                rejected.append(Rejection(line, record_or_reason))
                continue
            if record_or_reason.tender_id in seen:
                rejected.append(Rejection(line, "duplicate tender_id"))
                continue
            seen.add(record_or_reason.tender_id)
            records.append(record_or_reason)
    finally:
        if isinstance(source, (str, Path)):
            stream.close()
        elif not isinstance(source, (bytes, bytearray, io.TextIOBase)):
            stream.detach()
    return ParseResult(records, rejected)


def _parse_row(row: list[str], index: Mapping[str, int], width: int):
    if len(row) != width:
        return f"expected {width} fields, found {len(row)}"
    get = lambda name: row[index[name]].strip()  # noqa: E731

    tender_id = get("tender_id")
    if not tender_id:
        return "empty tender_id"
    try:
        price = float(get("price"))
    except ValueError:
        return "non-numeric price"
    if not math.isfinite(price):
        return "non-numeric price"
    if price <= 0:
        return "non-positive price"
    try:
        n_bidders = int(get("n_bidders"))
    except ValueError:
        return "non-integer bidder count"
    if n_bidders < 1:
        return "bidder count below 1"
    date = None
    if "date" in index and get("date"):
        try:
            date = dt.date.fromisoformat(get("date"))
        except ValueError:
            return "invalid date"
    return ProcurementRecord(
        tender_id=tender_id,
        authority_id=get("authority_id"),
        winner_id=get("winner_id"),
        price=price,
        n_bidders=n_bidders,
        date=date,
    )


def _entity_totals(pairs: Iterable[tuple[str, float]]) -> dict[str, float]:
    grouped: dict[str, list[float]] = defaultdict(list)
    for key, price in pairs:
        grouped[key].append(price)
    # fsum is exactly rounded, hence independent of record order
    return {key: math.fsum(prices) for key, prices in grouped.items()}


def _totals_sample(totals: Mapping[str, float], floor: float, kind: SampleKind):
    kept = sorted((k, v) for k, v in totals.items() if v >= floor)
    if not kept:
        return None
    labels, values = zip(*kept)
    return Sample(np.array(values), kind=kind, unit="currency", labels=labels)


def aggregate(records: list[ProcurementRecord], floor: float = DEFAULT_FLOOR):
    """Collapse tender records into revenues, spendings and bidder counts.

    Returns ``(revenues, spendings, bidders, summary)``. Per-entity totals
    below ``floor`` are dropped; bidder counts are never filtered. Entity
    series are ordered by entity id so the result does not depend on the
    order of ``records``. A series left empty by the floor is ``None``.
    """
    if not records:
        raise EmptyInputError("no records to aggregate")
    if floor < 0:
        raise ValueError("floor must be non-negative")

    revenues = _totals_sample(
        _entity_totals((r.winner_id, r.price) for r in records), floor, SampleKind.REVENUES
    )
    spendings = _totals_sample(
        _entity_totals((r.authority_id, r.price) for r in records), floor, SampleKind.SPENDINGS
    )
    counts = np.sort(np.array([r.n_bidders for r in records], dtype=float))
    bidders = Sample(counts, kind=SampleKind.BIDDER_COUNTS, unit="bidders")

    summary = AggregationSummary(
        total_money=math.fsum(r.price for r in records),
        n_suppliers=0 if revenues is None else len(revenues),
        n_authorities=0 if spendings is None else len(spendings),
        n_tenders=len(records),
        n_bids_total=sum(r.n_bidders for r in records),
    )
    return revenues, spendings, bidders, summary


def standardize(sample: Sample) -> tuple[Sample, float]:
    """Express values in units of the sample standard deviation.

    No centering is applied, so positivity and all value ratios survive.
    The standard deviation uses the n-1 denominator.
    """
    if len(sample) < 2:
        raise ZeroVarianceError("need at least two values to standardize")
    scale = float(np.std(sample.values, ddof=1))
    if np.all(sample.values == sample.values[0]) or not scale > 0:
        raise ZeroVarianceError("all values are identical")
    return Sample(sample.values / scale, kind=sample.kind, unit="sd", labels=sample.labels), scale
