"""Candidate outlier handling applied between search and forecast.

Policies are named by config strings: ``none``, ``winsor``,
``tailc:<c1>:<c2>`` (drop counts), ``tailp:<g1>:<g2>`` (drop fractions)
and ``zscore:<tau>``.  All act on the candidate target values; removal
policies drop whole candidate entries, winsorization only edits values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .neighbors import CandidateSet


@dataclass(frozen=True)
class OutlierPolicy:
    tag: str
    c1: int = 0
    c2: int = 0
    g1: float = 0.0
    g2: float = 0.0
    tau: float = 2.0

    @property
    def name(self) -> str:
        if self.tag == "tailc":
            return f"tailc:{self.c1}:{self.c2}"
        if self.tag == "tailp":
            return f"tailp:{self.g1:g}:{self.g2:g}"
        if self.tag == "zscore":
            return f"zscore:{self.tau:g}"
        return self.tag

    @property
    def size_preserving(self) -> bool:
        """True when the candidate count never shrinks."""
        return self.tag in ("none", "winsor")


def parse_outlier(name: str | OutlierPolicy) -> OutlierPolicy:
    if isinstance(name, OutlierPolicy):
        return name
    parts = str(name).strip().split(":")
    tag = parts[0]
    try:
        if tag in ("none", "winsor") and len(parts) == 1:
            return OutlierPolicy(tag)
        if tag == "tailc" and len(parts) == 3:
            c1, c2 = int(parts[1]), int(parts[2])
            if c1 < 0 or c2 < 0:
                raise ValueError("tailc counts must be >= 0")
            return OutlierPolicy("tailc", c1=c1, c2=c2)
        if tag == "tailp" and len(parts) == 3:
            g1, g2 = float(parts[1]), float(parts[2])
            if g1 < 0 or g2 < 0 or g1 + g2 >= 1:
                raise ValueError("tailp fractions must be >= 0 and sum below 1")
            return OutlierPolicy("tailp", g1=g1, g2=g2)
        if tag == "zscore" and len(parts) == 2:
            tau = float(parts[1])
            if tau <= 0:
                raise ValueError("zscore threshold must be > 0")
            return OutlierPolicy("zscore", tau=tau)
    except ValueError as exc:
        if "invalid literal" in str(exc) or "could not convert" in str(exc):
            raise ValueError(f"malformed outlier policy {name!r}") from None
        raise
    raise ValueError(
        f"unknown outlier policy {name!r}; expected none, winsor, "
        "tailc:<c1>:<c2>, tailp:<g1>:<g2> or zscore:<tau>"
    )


def _take(candidates: CandidateSet, keep: np.ndarray) -> CandidateSet:
    if not keep.size:
        raise ValueError("outlier removal left no candidates")
    return replace(
        candidates,
        values=candidates.values[keep],
        distances=candidates.distances[keep],
        sources=candidates.sources[keep],
    )


def winsorize(candidates: CandidateSet) -> CandidateSet:
    """Replace the single smallest value by the second-smallest and the
    single largest by the second-largest."""
    n = len(candidates)
    if n < 3:
        raise ValueError(f"winsorization needs at least 3 candidates, got {n}")
    order = np.argsort(candidates.values, kind="stable")
    ranked = candidates.values[order]
    values = candidates.values.copy()
    values[order[0]] = ranked[1]
    values[order[-1]] = ranked[-2]
    return replace(candidates, values=values)


def tail_remove(candidates: CandidateSet, low: int, high: int) -> CandidateSet:
    """Drop the ``low`` smallest-valued and ``high`` largest-valued entries."""
    n = len(candidates)
    if low < 0 or high < 0:
        raise ValueError("tail removal counts must be >= 0")
    if low + high >= n:
        raise ValueError(
            f"cannot drop {low} + {high} of {n} candidates; need low + high < n"
        )
    order = np.argsort(candidates.values, kind="stable")
    dropped = np.concatenate([order[:low], order[n - high :] if high else order[:0]])
    keep = np.setdiff1d(np.arange(n), dropped)
    return _take(candidates, keep)


def zscore_remove(candidates: CandidateSet, tau: float) -> CandidateSet:
    """Drop entries whose value sits more than ``tau`` sample standard
    deviations from the candidate mean.  Single pass; degenerate spread
    (all values equal) removes nothing."""
    n = len(candidates)
    if n < 3:
        raise ValueError(f"z-score removal needs at least 3 candidates, got {n}")
    values = candidates.values
    sd = values.std(ddof=1)
    if sd == 0.0:
        return candidates
    keep = np.flatnonzero(np.abs(values - values.mean()) <= tau * sd)
    if not keep.size:
        raise ValueError(f"z-score removal with tau={tau:g} left no candidates")
    return _take(candidates, keep)


def apply_outlier_policy(
    candidates: CandidateSet, policy: str | OutlierPolicy
) -> CandidateSet:
    policy = parse_outlier(policy)
    if policy.tag == "none":
        return candidates
    if policy.tag == "winsor":
        return winsorize(candidates)
    if policy.tag == "tailc":
        return tail_remove(candidates, policy.c1, policy.c2)
    if policy.tag == "tailp":
        n = len(candidates)
        return tail_remove(candidates, int(policy.g1 * n), int(policy.g2 * n))
    if policy.tag == "zscore":
        return zscore_remove(candidates, policy.tau)
    raise AssertionError(f"unhandled policy tag {policy.tag}")
