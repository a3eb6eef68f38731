"""Raw detector CSV ingestion: parse, aggregate to 15 minutes, impute gaps.

The pipeline is ``parse_csv`` (5-minute records, missing allowed) then
``aggregate_15min`` (sum of three 5-minute flows) then ``impute_missing``
(weekly-pattern substitution), producing a gap-free :class:`TimeSeries`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .series import SLOTS_PER_WEEK, TimeSeries

FIVE_MIN = timedelta(minutes=5)
FIFTEEN_MIN = timedelta(minutes=15)

# Formats tried in order when no explicit timestamp format is given.
_KNOWN_TS_FORMATS = (
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%m/%d/%Y %H:%M:%S",
    "%m/%d/%Y %H:%M",
)

_MISSING_TOKENS = frozenset({"", "na", "nan", "null", "none", "-"})


class IngestionError(ValueError):
    """Raised when raw input violates the ingestion contract."""


@dataclass(frozen=True)
class RawSeries:
    """Timestamped flow records; NaN marks a missing flow.

    Timestamps are strictly increasing.  Grid gaps (absent rows) are
    equivalent to rows whose flow is missing.
    """

    timestamps: tuple[datetime, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size != len(self.timestamps):
            raise IngestionError("timestamps and values must align one-to-one")
        if vals.size == 0:
            raise IngestionError("raw series is empty")
        for prev, cur in zip(self.timestamps, self.timestamps[1:]):
            if cur <= prev:
                raise IngestionError(f"timestamps not strictly increasing at {cur}")
        with np.errstate(invalid="ignore"):
            if np.any(vals < 0):
                raise IngestionError("negative flow value in raw series")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.values).sum())


@dataclass
class ImputationReport:
    """Counts of imputed slots by substitution rule."""

    previous_week: int = 0
    three_week_mean: int = 0

    @property
    def total(self) -> int:
        return self.previous_week + self.three_week_mean

    def lines(self) -> list[str]:
        return [
            f"imputed(previous-week): {self.previous_week}",
            f"imputed(three-week-mean): {self.three_week_mean}",
            f"imputed: {self.total}",
        ]


def _parse_timestamp(text: str, fmt: str | None) -> datetime:
    if fmt is not None:
        return datetime.strptime(text, fmt)
    for candidate in _KNOWN_TS_FORMATS:
        try:
            return datetime.strptime(text, candidate)
        except ValueError:
            continue
    raise ValueError(text)


def parse_csv(
    path: str | Path,
    ts_col: str = "timestamp",
    flow_col: str = "flow",
    ts_format: str | None = None,
) -> RawSeries:
    """Parse a detector CSV into a :class:`RawSeries`.

    Unparseable flow cells become missing markers; unparseable timestamps
    and duplicated timestamps are errors, as is a missing column.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        for col in (ts_col, flow_col):
            if col not in fields:
                raise IngestionError(f"{path}: missing column {col!r}")
        stamps: list[datetime] = []
        values: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            raw_ts = (row[ts_col] or "").strip()
            try:
                stamp = _parse_timestamp(raw_ts, ts_format)
            except ValueError:
                raise IngestionError(
                    f"{path}:{lineno}: unparseable timestamp {raw_ts!r}"
                ) from None
            cell = (row[flow_col] or "").strip()
            if cell.lower() in _MISSING_TOKENS:
                flow = math.nan
            else:
                try:
                    flow = float(cell)
                except ValueError:
                    flow = math.nan
            stamps.append(stamp)
            values.append(flow)
    if not stamps:
        raise IngestionError(f"{path}: no data rows")
    order = sorted(range(len(stamps)), key=stamps.__getitem__)
    stamps = [stamps[i] for i in order]
    values = [values[i] for i in order]
    for prev, cur in zip(stamps, stamps[1:]):
        if cur == prev:
            raise IngestionError(f"{path}: duplicated timestamp {cur}")
    return RawSeries(timestamps=tuple(stamps), values=np.asarray(values))


def _materialize_grid(
    raw: RawSeries, cadence: timedelta
) -> tuple[datetime, np.ndarray]:
    """Expand records onto a contiguous grid; absent slots become NaN."""
    start, end = raw.timestamps[0], raw.timestamps[-1]
    n = (end - start) // cadence + 1
    grid = np.full(n, np.nan)
    for stamp, value in zip(raw.timestamps, raw.values):
        offset, rem = divmod(stamp - start, cadence)
        if rem:
            raise IngestionError(
                f"timestamp {stamp} not on the {cadence} grid of the series"
            )
        grid[offset] = value
    return start, grid


def aggregate_15min(raw: RawSeries) -> RawSeries:
    """Sum triples of 5-minute flows into 15-minute flows.

    An output slot is missing iff any of its three inputs is missing or
    absent.  The output starts at the first 15-minute boundary in the
    input and has ``floor(n / 3)`` slots from there; a trailing partial
    tuple is dropped.
    """
    if len(raw) >= 2:
        deltas = [b - a for a, b in zip(raw.timestamps, raw.timestamps[1:])]
        if min(deltas) != FIVE_MIN:
            raise IngestionError("input cadence is not 5 minutes")
    start, grid = _materialize_grid(raw, FIVE_MIN)

    lead = 0
    when = start
    while (when.minute % 15) or when.second or when.microsecond:
        lead += 1
        when = when + FIVE_MIN
        if lead >= grid.size:
            raise IngestionError("no complete 15-minute tuple in input")
    grid = grid[lead:]
    n_out = grid.size // 3
    if n_out == 0:
        raise IngestionError("no complete 15-minute tuple in input")
    triples = grid[: 3 * n_out].reshape(n_out, 3)
    sums = triples.sum(axis=1)  # NaN propagates: any missing input -> missing output
    stamps = tuple(when + i * FIFTEEN_MIN for i in range(n_out))
    return RawSeries(timestamps=stamps, values=sums)


def impute_missing(raw: RawSeries) -> tuple[TimeSeries, ImputationReport]:
    """Fill missing 15-minute slots from the same slot in earlier weeks.

    Gaps shorter than 4 slots copy the value one week back; longer gaps
    take the mean of the values one, two and three weeks back.  Gaps are
    processed chronologically, so donors may themselves be imputed.  The
    first three weeks must be complete.  The operation is idempotent.
    """
    if len(raw) >= 2:
        deltas = {b - a for a, b in zip(raw.timestamps, raw.timestamps[1:])}
        for delta in deltas:
            if delta.total_seconds() % FIFTEEN_MIN.total_seconds():
                raise IngestionError("input cadence is not 15 minutes")
    start, grid = _materialize_grid(raw, FIFTEEN_MIN)

    missing = np.isnan(grid)
    report = ImputationReport()
    if missing.any():
        head = min(SLOTS_PER_WEEK * 3, grid.size)
        if missing[:head].any():
            raise IngestionError("missing data within the first 3 weeks")
        values = grid.copy()
        idx = np.flatnonzero(missing)
        runs = np.split(idx, np.flatnonzero(np.diff(idx) != 1) + 1)
        for run in runs:
            if run.size < 4:
                for j in run:
                    values[j] = values[j - SLOTS_PER_WEEK]
                report.previous_week += int(run.size)
            else:
                for j in run:
                    donors = values[
                        [j - SLOTS_PER_WEEK, j - 2 * SLOTS_PER_WEEK, j - 3 * SLOTS_PER_WEEK]
                    ]
                    values[j] = donors.mean()
                report.three_week_mean += int(run.size)
        grid = values
    return TimeSeries(start=start, values=grid), report
