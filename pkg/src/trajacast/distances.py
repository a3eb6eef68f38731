"""Distances between equal-length trajectories.

Every kind is identified by a config string, e.g. ``euclidean``,
``lp:3``, ``headtail:1:1`` or ``lcs:0.5:2``; :func:`parse_distance`
turns the string into a :class:`DistanceKind` and ``DistanceKind.name``
round-trips it.  ``distance`` compares one pair, ``paired_distance``
compares one query against a whole reference block row-wise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SIMPLE_TAGS = (
    "euclidean", "weuclidean", "manhattan", "sup", "cosine", "pearson", "canberra",
)


@dataclass(frozen=True)
class DistanceKind:
    """Parsed distance identifier with its parameters."""

    tag: str
    p: float = 2.0        # lp order
    head: int = 0         # headtail: leading coordinates compared
    tail: int = 0         # headtail: trailing coordinates compared
    eps: float = 0.0      # lcs: value tolerance
    delta: int = 0        # lcs: index offset tolerance

    @property
    def name(self) -> str:
        if self.tag == "lp":
            return f"lp:{self.p:g}"
        if self.tag == "headtail":
            return f"headtail:{self.head}:{self.tail}"
        if self.tag == "lcs":
            return f"lcs:{self.eps:g}:{self.delta}"
        return self.tag

    @property
    def is_metric(self) -> bool:
        """True when the triangle inequality is guaranteed."""
        return self.tag in ("euclidean", "weuclidean", "manhattan", "sup",
                            "lp", "canberra")


def parse_distance(name: str | DistanceKind) -> DistanceKind:
    """Parse a distance config string."""
    if isinstance(name, DistanceKind):
        return name
    parts = str(name).strip().split(":")
    tag = parts[0]
    try:
        if tag in _SIMPLE_TAGS and len(parts) == 1:
            return DistanceKind(tag)
        if tag == "lp" and len(parts) == 2:
            p = float(parts[1])
            if p < 1:
                raise ValueError(f"lp order must be >= 1, got {p:g}")
            return DistanceKind("lp", p=p)
        if tag == "headtail" and len(parts) == 3:
            head, tail = int(parts[1]), int(parts[2])
            if head < 0 or tail < 0:
                raise ValueError("headtail lengths must be >= 0")
            if head + tail == 0:
                raise ValueError("headtail needs at least one coordinate")
            return DistanceKind("headtail", head=head, tail=tail)
        if tag == "lcs" and len(parts) == 3:
            eps, delta = float(parts[1]), int(parts[2])
            if eps < 0 or delta < 0:
                raise ValueError("lcs tolerances must be >= 0")
            return DistanceKind("lcs", eps=eps, delta=delta)
    except ValueError as exc:
        if "invalid literal" in str(exc) or "could not convert" in str(exc):
            raise ValueError(f"malformed distance name {name!r}") from None
        raise
    raise ValueError(
        f"unknown distance {name!r}; expected one of {', '.join(_SIMPLE_TAGS)}, "
        "lp:<p>, headtail:<l1>:<l2>, lcs:<eps>:<delta>"
    )


def recentness_weights(length: int) -> np.ndarray:
    """Linearly increasing coordinate weights summing to 1.

    Coordinate 1 is the oldest observation in a trajectory and gets the
    smallest weight; the most recent coordinate gets weight
    ``L / (L(L+1)/2)``.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    i = np.arange(1, length + 1, dtype=np.float64)
    return i / (length * (length + 1) / 2.0)


def lcs_length(x: np.ndarray, y: np.ndarray, eps: float, delta: int) -> int:
    """Length of the longest common subsequence under tolerances.

    Elements ``x[i]`` and ``y[j]`` (1-based positions) match when
    ``|x[i] - y[j]| <= eps`` and ``|i - j| <= delta``.
    """
    n, m = len(x), len(y)
    prev = [0] * (m + 1)
    for i in range(1, n + 1):
        cur = [0] * (m + 1)
        xi = x[i - 1]
        lo = max(1, i - delta)
        hi = min(m, i + delta)
        for j in range(1, m + 1):
            if lo <= j <= hi and abs(xi - y[j - 1]) <= eps:
                cur[j] = prev[j - 1] + 1
            else:
                a, b = prev[j], cur[j - 1]
                cur[j] = a if a >= b else b
        prev = cur
    return prev[m]


def _check_block(kind: DistanceKind, X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2 or y.ndim != 1 or X.shape[1] != y.shape[0]:
        raise ValueError(
            f"shape mismatch: reference {X.shape} vs query {y.shape}"
        )
    length = y.shape[0]
    if kind.tag == "headtail" and kind.head + kind.tail > length - 1:
        raise ValueError(
            f"headtail needs head + tail <= length - 1, got "
            f"{kind.head} + {kind.tail} with length {length}"
        )


def paired_distance(kind: str | DistanceKind, X, y) -> np.ndarray:
    """Distance from each row of ``X`` to the single trajectory ``y``."""
    kind = parse_distance(kind)
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    _check_block(kind, X, y)
    diff = None
    if kind.tag in ("euclidean", "weuclidean", "manhattan", "lp", "sup"):
        diff = np.abs(X - y)

    if kind.tag == "euclidean":
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if kind.tag == "weuclidean":
        w = recentness_weights(y.shape[0])
        return np.sqrt(np.einsum("ij,j,ij->i", diff, w, diff))
    if kind.tag == "manhattan":
        return diff.sum(axis=1)
    if kind.tag == "sup":
        return diff.max(axis=1)
    if kind.tag == "lp":
        return np.power(np.power(diff, kind.p).sum(axis=1), 1.0 / kind.p)
    if kind.tag == "headtail":
        head = np.abs(X[:, : kind.head] - y[: kind.head]).sum(axis=1)
        tail = 0.0
        if kind.tail:
            tail = np.abs(X[:, -kind.tail :] - y[-kind.tail :]).sum(axis=1)
        return head + tail
    if kind.tag == "cosine":
        ny = np.sqrt(y @ y)
        nX = np.sqrt(np.einsum("ij,ij->i", X, X))
        if ny == 0.0 or np.any(nX == 0.0):
            raise ValueError("cosine distance undefined for zero-norm trajectory")
        cos = np.clip((X @ y) / (nX * ny), -1.0, 1.0)
        return 1.0 - cos
    if kind.tag == "pearson":
        yc = y - y.mean()
        Xc = X - X.mean(axis=1, keepdims=True)
        ny = np.sqrt(yc @ yc)
        nX = np.sqrt(np.einsum("ij,ij->i", Xc, Xc))
        if ny == 0.0 or np.any(nX == 0.0):
            raise ValueError("pearson distance undefined for constant trajectory")
        r = np.clip((Xc @ yc) / (nX * ny), -1.0, 1.0)
        return 1.0 - r
    if kind.tag == "canberra":
        num = np.abs(X - y)
        den = np.abs(X) + np.abs(y)
        with np.errstate(invalid="ignore", divide="ignore"):
            terms = np.where(den == 0.0, 0.0, num / den)
        return terms.sum(axis=1)
    if kind.tag == "lcs":
        length = y.shape[0]
        out = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            out[i] = length - lcs_length(X[i], y, kind.eps, kind.delta)
        return out
    raise AssertionError(f"unhandled distance tag {kind.tag}")


def distance(kind: str | DistanceKind, x, y) -> float:
    """Distance between two equal-length trajectories."""
    x = np.asarray(x, dtype=np.float64)
    return float(paired_distance(kind, x[np.newaxis, :], np.asarray(y))[0])
