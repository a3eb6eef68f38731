"""Regular 15-minute time series container and its on-disk CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .validation import as_float_array

CADENCE = timedelta(minutes=15)
SLOTS_PER_DAY = 96
SLOTS_PER_WEEK = 7 * SLOTS_PER_DAY
TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"


@dataclass(frozen=True)
class TimeSeries:
    """Gap-free flow series on a 15-minute grid.

    ``values[i]`` is the flow observed in the slot starting at
    ``start + i * CADENCE``.  Positions used throughout the package are
    1-based: series position ``p`` corresponds to ``values[p - 1]``.
    """

    start: datetime
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = as_float_array(self.values, "values")
        if np.any(vals < 0):
            raise ValueError("flow values must be non-negative")
        if (self.start.minute % 15) or self.start.second or self.start.microsecond:
            raise ValueError("series start must fall on a 15-minute boundary")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    @property
    def start_slot(self) -> int:
        """Slot-of-day (0..95) of the first observation."""
        return (self.start.hour * 60 + self.start.minute) // 15

    def timestamp(self, position: int) -> datetime:
        """Timestamp of 1-based series position ``position``."""
        self._check_position(position)
        return self.start + (position - 1) * CADENCE

    def position(self, when: datetime) -> int:
        """1-based series position of timestamp ``when``."""
        delta = when - self.start
        ticks, rem = divmod(delta, CADENCE)
        if rem:
            raise ValueError(f"{when} is not on the series grid")
        pos = ticks + 1
        self._check_position(pos)
        return pos

    def slot_of_day(self, position: int) -> int:
        """Slot-of-day (0..95) of 1-based series position ``position``."""
        self._check_position(position)
        return (self.start_slot + position - 1) % SLOTS_PER_DAY

    def hour_of_day(self, position: int) -> int:
        """Hour (0..23) of 1-based series position ``position``."""
        return self.slot_of_day(position) // 4

    def _check_position(self, position: int) -> None:
        if not 1 <= position <= len(self):
            raise ValueError(
                f"position {position} outside series range 1..{len(self)}"
            )


def save_series(ts: TimeSeries, path: str | Path) -> None:
    """Write a series as CSV with columns ``timestamp, flow``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "flow"])
        when = ts.start
        for value in ts.values:
            writer.writerow([when.strftime(TIMESTAMP_FORMAT), format(value, ".10g")])
            when = when + CADENCE


def load_series(path: str | Path) -> TimeSeries:
    """Read a series written by :func:`save_series`, validating the grid."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["timestamp", "flow"]:
            raise ValueError(f"{path}: expected header 'timestamp,flow'")
        stamps: list[datetime] = []
        values: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                stamps.append(datetime.strptime(row[0].strip(), TIMESTAMP_FORMAT))
                values.append(float(row[1]))
            except (IndexError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad row {row!r}") from exc
    if not stamps:
        raise ValueError(f"{path}: no data rows")
    for prev, cur in zip(stamps, stamps[1:]):
        if cur - prev != CADENCE:
            raise ValueError(f"{path}: gap in 15-minute grid at {cur}")
    return TimeSeries(start=stamps[0], values=np.asarray(values))
