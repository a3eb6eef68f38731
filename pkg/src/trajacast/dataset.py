"""Trajectory extraction and chronological tune/test splits.

A trajectory of length ``L`` starting at 1-based series position ``i``
covers positions ``i .. i+L-1`` and is paired with the target at
``i+L-1+h`` for forecast step ``h``.  Queries are trajectory indices;
each query's reference set contains only trajectories strictly in its
past, so later information never leaks into a forecast.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime

import numpy as np

from .series import TimeSeries
from .validation import check_positive_int

W_POLICIES = ("equal", "floor-one")


@dataclass(frozen=True)
class TrajectoryView:
    """Window of a series: positions ``index .. index + length - 1``."""

    index: int
    length: int
    step: int = 1

    def __post_init__(self):
        check_positive_int(self.index, "index")
        check_positive_int(self.length, "length")
        check_positive_int(self.step, "step")

    @property
    def target_index(self) -> int:
        """1-based series position of the paired target."""
        return self.index + self.length - 1 + self.step

    def slice(self, values: np.ndarray) -> np.ndarray:
        return values[self.index - 1 : self.index - 1 + self.length]


def make_trajectories(n: int, length: int, step: int = 1) -> list[TrajectoryView]:
    """All trajectory views of a series of ``n`` values, oldest first."""
    length = check_positive_int(length, "length")
    step = check_positive_int(step, "step")
    count = n - length - step + 1
    if count < 1:
        raise ValueError(
            f"series of length {n} admits no trajectory with length {length} "
            f"and step {step}"
        )
    return [TrajectoryView(i, length, step) for i in range(1, count + 1)]


def window_matrix(values: np.ndarray, length: int) -> np.ndarray:
    """Row ``j`` (0-based) is the trajectory starting at position ``j + 1``."""
    return np.lib.stride_tricks.sliding_window_view(values, length)


def target_values(values: np.ndarray, length: int, step: int,
                  indices: np.ndarray) -> np.ndarray:
    """Targets paired with 1-based trajectory ``indices``."""
    return values[np.asarray(indices) + length + step - 2]


@dataclass(frozen=True)
class SplitConfig:
    """Chronological tune/test split in trajectory indices.

    Tune queries are ``u .. s-1`` with reference ``[1, q-1]``; test
    queries are ``s .. last`` with reference ``[w, q-1]``.  The two query
    ranges have equal size up to an off-by-one left over from date
    alignment.
    """

    u: int
    s: int
    w: int
    last: int
    length: int
    step: int = 1

    def __post_init__(self):
        for name in ("u", "s", "w", "last", "length", "step"):
            check_positive_int(getattr(self, name), name)
        if not self.u < self.s <= self.last:
            raise ValueError(
                f"need u < s <= last, got u={self.u}, s={self.s}, last={self.last}"
            )
        if self.w > self.s - 1:
            raise ValueError(f"w={self.w} leaves the first test query no reference")
        if abs(self.tune_size - self.test_size) > 1:
            raise ValueError(
                f"tune size {self.tune_size} and test size {self.test_size} "
                "differ by more than 1"
            )

    @property
    def tune_size(self) -> int:
        return self.s - self.u

    @property
    def test_size(self) -> int:
        return self.last - self.s + 1

    def queries(self, side: str) -> np.ndarray:
        """1-based trajectory indices of the named query range."""
        if side == "tune":
            return np.arange(self.u, self.s)
        if side == "test":
            return np.arange(self.s, self.last + 1)
        raise ValueError(f"side must be 'tune' or 'test', got {side!r}")

    def targets(self, side: str) -> np.ndarray:
        """1-based series positions forecast by the named query range."""
        return self.queries(side) + self.length + self.step - 1

    def rebase(self, length: int, step: int | None = None) -> "SplitConfig":
        """Same split over the same target positions for another window
        length or forecast step."""
        step = self.step if step is None else step
        shift = (self.length + self.step) - (length + step)
        moved = replace(
            self,
            u=self.u + shift,
            s=self.s + shift,
            w=self.w + shift,
            last=self.last + shift,
            length=length,
            step=step,
        )
        return moved


def reference_for(split: SplitConfig, query: int, side: str) -> tuple[int, int]:
    """Inclusive reference index range ``(lo, hi)`` for a query.

    The range always ends at ``query - 1``: only strictly earlier
    trajectories may serve as candidates.
    """
    queries = split.queries(side)
    if not queries[0] <= query <= queries[-1]:
        raise ValueError(
            f"query {query} outside {side} range {queries[0]}..{queries[-1]}"
        )
    lo = 1 if side == "tune" else split.w
    if lo > query - 1:
        raise ValueError(f"query {query} has an empty reference set")
    return lo, query - 1


def _derive_w(u: int, s: int, last: int, policy: str) -> int:
    if policy == "floor-one":
        return 1
    if policy == "equal":
        # Mirrors the tune side: the first test query sees as much
        # history as the first tune query.
        w = last - s + 1
        if not 1 <= w <= s - 1:
            raise ValueError(
                f"equal-history policy gives w={w} outside 1..{s - 1}; "
                "use floor-one or move the split"
            )
        return w
    raise ValueError(f"w_policy must be one of {W_POLICIES}, got {policy!r}")


def split_from_indices(
    u: int, s: int, last: int, length: int, step: int = 1,
    w_policy: str = "equal",
) -> SplitConfig:
    """Build a split directly from trajectory indices."""
    return SplitConfig(
        u=u, s=s, w=_derive_w(u, s, last, w_policy), last=last,
        length=length, step=step,
    )


def build_split(
    series: TimeSeries,
    length: int,
    tune_start: datetime,
    test_start: datetime,
    test_end: datetime | None = None,
    step: int = 1,
    w_policy: str = "equal",
) -> SplitConfig:
    """Build a split from target dates.

    ``tune_start`` and ``test_start`` are the first timestamps to be
    forecast on each side; ``test_end`` (default: series end) is the last.
    ``s`` may be shifted by one index to equalize the side sizes; if the
    sides still differ by more than one, an error reports both lengths.
    """
    length = check_positive_int(length, "length")
    step = check_positive_int(step, "step")
    n = len(series)
    last_query = n - length - step + 1
    if last_query < 1:
        raise ValueError("series too short for the requested length and step")

    def query_of(when: datetime) -> int:
        pos = series.position(when)
        return pos - length - step + 1

    u = query_of(tune_start)
    s = query_of(test_start)
    last = query_of(test_end) if test_end is not None else last_query
    if u < 1:
        raise ValueError("tune_start leaves no room for a trajectory before it")
    if not u < s <= last <= last_query:
        raise ValueError(
            f"dates give u={u}, s={s}, last={last}; need u < s <= last <= {last_query}"
        )
    diff = (last - s + 1) - (s - u)  # test size minus tune size
    if diff in (-2, 2):
        s += diff // 2
    elif abs(diff) > 2:
        raise ValueError(
            f"tune size {s - u} and test size {last - s + 1} differ by more "
            "than an index shift can absorb"
        )
    return SplitConfig(
        u=u, s=s, w=_derive_w(u, s, last, w_policy), last=last,
        length=length, step=step,
    )
