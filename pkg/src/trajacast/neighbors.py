"""Nearest-trajectory search over a query's reference set.

Selection is exact: the K smallest distances win, and equal distances
are broken in favour of the more recent trajectory (larger source
index).  Results come back ordered, nearest first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import TrajectoryView, target_values, window_matrix
from .distances import DistanceKind, paired_distance, parse_distance
from .series import SLOTS_PER_DAY
from .validation import check_nonnegative_int, check_positive_int


class EmptyReferenceError(ValueError):
    """No reference trajectories remain; widen the filter or the range."""


@dataclass(frozen=True)
class CandidateSet:
    """K nearest trajectories' targets, nearest first.

    ``values[j]`` is the target paired with source trajectory
    ``sources[j]`` at distance ``distances[j]`` from the query.  May hold
    fewer than ``k`` entries when the reference set is small.
    """

    values: np.ndarray = field(repr=False)
    distances: np.ndarray = field(repr=False)
    sources: np.ndarray = field(repr=False)
    k: int

    def __post_init__(self):
        v, d, s = (np.asarray(a) for a in (self.values, self.distances, self.sources))
        if not (v.shape == d.shape == s.shape) or v.ndim != 1 or v.size == 0:
            raise ValueError("values, distances and sources must align and be non-empty")
        if v.size > self.k:
            raise ValueError(f"{v.size} entries exceed k={self.k}")
        if np.any(np.diff(d) < 0):
            raise ValueError("candidates must be ordered by ascending distance")
        ties = np.diff(d) == 0
        if np.any(ties & (np.diff(s) >= 0)):
            raise ValueError("equal distances must be ordered most recent first")

    def __len__(self) -> int:
        return self.values.size


def rank_smallest(dist: np.ndarray, sources: np.ndarray, k: int) -> np.ndarray:
    """Positions of the k smallest distances, ordered ascending.

    Ties are resolved toward the larger source index, both for the cut
    at rank k and for the ordering of the result.
    """
    n = dist.size
    if k >= n:
        return np.lexsort((-sources, dist))
    part = np.argpartition(dist, k - 1)
    kth = dist[part[k - 1]]
    less = np.flatnonzero(dist < kth)
    need = k - less.size
    ties = np.flatnonzero(dist == kth)
    if need < ties.size:
        keep = np.argsort(-sources[ties], kind="stable")[:need]
        ties = ties[keep]
    chosen = np.concatenate([less, ties])
    return chosen[np.lexsort((-sources[chosen], dist[chosen]))]


def target_slot(start_slot: int, index: int, length: int, step: int) -> int:
    """Slot-of-day (0..95) of the target paired with trajectory ``index``."""
    return (start_slot + index + length + step - 2) % SLOTS_PER_DAY


def seasonal_filter(
    reference: np.ndarray,
    query_slot: int,
    radius: int,
    *,
    start_slot: int,
    length: int,
    step: int = 1,
) -> np.ndarray:
    """Keep reference trajectories whose target slot-of-day is within
    ``radius`` slots (circularly) of ``query_slot``."""
    radius = check_nonnegative_int(radius, "radius")
    if radius > SLOTS_PER_DAY // 2:
        raise ValueError(f"radius must be <= {SLOTS_PER_DAY // 2}, got {radius}")
    reference = np.asarray(reference)
    slots = (start_slot + reference + length + step - 2) % SLOTS_PER_DAY
    offset = (slots - query_slot) % SLOTS_PER_DAY
    keep = np.minimum(offset, SLOTS_PER_DAY - offset) <= radius
    kept = reference[keep]
    if kept.size == 0:
        raise EmptyReferenceError(
            f"seasonal filter with radius {radius} left no reference trajectories"
        )
    return kept


def nearest_candidates(
    values: np.ndarray,
    *,
    length: int,
    step: int,
    kind: str | DistanceKind,
    k: int,
    query: int,
    reference: np.ndarray,
) -> CandidateSet:
    """K nearest reference trajectories to query trajectory ``query``.

    ``reference`` holds 1-based trajectory indices, all strictly below
    ``query``; the result is truncated, not an error, when fewer than
    ``k`` remain.
    """
    k = check_positive_int(k, "k")
    kind = parse_distance(kind)
    reference = np.asarray(reference)
    if reference.size == 0:
        raise EmptyReferenceError(f"query {query} has an empty reference set")
    if reference.min() < 1 or reference.max() >= query:
        raise ValueError(
            f"reference indices must lie in 1..{query - 1} for query {query}"
        )
    windows = window_matrix(values, length)
    dist = paired_distance(kind, windows[reference - 1], windows[query - 1])
    order = rank_smallest(dist, reference, min(k, reference.size))
    sources = reference[order]
    return CandidateSet(
        values=target_values(values, length, step, sources),
        distances=dist[order],
        sources=sources,
        k=k,
    )


def k_nearest(
    values: np.ndarray,
    query: TrajectoryView,
    reference: np.ndarray | tuple[int, int],
    kind: str | DistanceKind,
    k: int,
) -> CandidateSet:
    """Search wrapper taking a view; ``reference`` may be an inclusive
    ``(lo, hi)`` index range or an explicit index array."""
    if isinstance(reference, tuple):
        lo, hi = reference
        reference = np.arange(lo, hi + 1)
    return nearest_candidates(
        np.asarray(values, dtype=np.float64),
        length=query.length,
        step=query.step,
        kind=kind,
        k=k,
        query=query.index,
        reference=reference,
    )
