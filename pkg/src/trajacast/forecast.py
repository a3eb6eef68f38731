"""Point forecasts from nearest-trajectory candidates.

Model config names:

========================  ====================================================
``mean``                  arithmetic mean of candidate targets
``m1:<f1..f5>``           rank-weighted mean, nearest candidate weighted most
``m2:<g1..g4>``           distance-weighted mean
``m3``                    global candidate weights fitted by least squares
``localreg``              per-query regression of targets on trajectories
========================  ====================================================

Any name may carry a ``+seasonal:<R>`` suffix restricting candidates to
targets within R slots-of-day of the query's target.
:class:`SimilarityForecaster` runs one model over a split;
:class:`HourlyForecaster` dispatches to 24 per-hour configurations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._linalg import RIDGE, least_squares
from .dataset import SplitConfig, window_matrix
from .neighbors import (
    CandidateSet,
    nearest_candidates,
    seasonal_filter,
)
from .outliers import apply_outlier_policy, parse_outlier
from .series import TimeSeries
from .validation import check_positive_int

RANK_WEIGHT_FUNCTIONS = {
    "f1": lambda x: np.ones_like(x),
    "f2": lambda x: x,
    "f3": np.sqrt,
    "f4": np.log1p,
    "f5": lambda x: np.log1p(x) ** 2,
}

DISTANCE_WEIGHT_FUNCTIONS = {
    "g1": lambda d: 1.0 / (d + 0.01),
    "g2": lambda d: 1.0 / (np.sqrt(d) + 0.01),
    "g3": lambda d: 1.0 / (d * np.sqrt(d) + 0.01),
    "g4": lambda d: 1.0 / (d * d + 0.01),
}

MODEL_TAGS = ("mean", "m1", "m2", "m3", "localreg")


@dataclass(frozen=True)
class ModelSpec:
    """Parsed point model name."""

    tag: str
    weight_fn: str | None = None
    radius: int | None = None

    @property
    def name(self) -> str:
        base = self.tag if self.weight_fn is None else f"{self.tag}:{self.weight_fn}"
        if self.radius is not None:
            base += f"+seasonal:{self.radius}"
        return base


def parse_model(name: str | ModelSpec) -> ModelSpec:
    if isinstance(name, ModelSpec):
        return name
    text = str(name).strip()
    radius = None
    if "+" in text:
        text, _, suffix = text.partition("+")
        if not suffix.startswith("seasonal:"):
            raise ValueError(f"unknown model suffix {suffix!r}")
        radius = int(suffix.split(":", 1)[1])
        if radius < 0:
            raise ValueError("seasonal radius must be >= 0")
    parts = text.split(":")
    tag = parts[0]
    if tag in ("mean", "m3", "localreg") and len(parts) == 1:
        return ModelSpec(tag, radius=radius)
    if tag == "m1" and len(parts) == 2 and parts[1] in RANK_WEIGHT_FUNCTIONS:
        return ModelSpec(tag, weight_fn=parts[1], radius=radius)
    if tag == "m2" and len(parts) == 2 and parts[1] in DISTANCE_WEIGHT_FUNCTIONS:
        return ModelSpec(tag, weight_fn=parts[1], radius=radius)
    raise ValueError(
        f"unknown point model {name!r}; expected mean, m1:<f1..f5>, "
        "m2:<g1..g4>, m3 or localreg, optionally with +seasonal:<R>"
    )


def forecast_mean(candidates: CandidateSet) -> float:
    values = candidates.values
    return float(values.sum() / values.size)


def forecast_rank_weighted(candidates: CandidateSet, weight_fn: str) -> float:
    """Weight candidate s of K by ``f(K - s + 1)``, nearest first."""
    fn = RANK_WEIGHT_FUNCTIONS[weight_fn]
    n = len(candidates)
    raw = fn(np.arange(n, 0, -1, dtype=np.float64))
    return float((raw * candidates.values).sum() / raw.sum())


def forecast_distance_weighted(candidates: CandidateSet, weight_fn: str) -> float:
    fn = DISTANCE_WEIGHT_FUNCTIONS[weight_fn]
    raw = fn(candidates.distances)
    return float((raw * candidates.values).sum() / raw.sum())


def fit_global_weights(candidate_values: np.ndarray, targets: np.ndarray,
                       ridge: float = RIDGE) -> tuple[np.ndarray, bool]:
    """Least-squares weights mapping ranked candidate values to targets.

    ``candidate_values`` has one row per tune query, each an ordered
    length-K candidate vector; the returned vector has K + 1 entries,
    the last being the bias.  ``used_ridge`` reports the fallback.
    """
    X = np.asarray(candidate_values, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("candidate_values must be a non-empty 2-D array")
    design = np.hstack([X, np.ones((X.shape[0], 1))])
    return least_squares(design, targets, ridge)


def forecast_global(candidates: CandidateSet, weights: np.ndarray) -> float:
    weights = np.asarray(weights, dtype=np.float64)
    if len(candidates) != weights.size - 1:
        raise ValueError(
            f"global weights expect {weights.size - 1} candidates, "
            f"got {len(candidates)}"
        )
    return float(candidates.values @ weights[:-1] + weights[-1])


def forecast_local_regression(
    query_trajectory: np.ndarray,
    source_trajectories: np.ndarray,
    targets: np.ndarray,
    ridge: float = RIDGE,
) -> float:
    """Regress candidate targets on their trajectories, evaluated at the
    query trajectory.  With fewer candidates than coordinates the ridge
    fallback keeps the fit defined."""
    X = np.asarray(source_trajectories, dtype=np.float64)
    design = np.hstack([X, np.ones((X.shape[0], 1))])
    coef, _ = least_squares(design, targets, ridge)
    return float(query_trajectory @ coef[:-1] + coef[-1])


class SimilarityForecaster(BaseEstimator):
    """Trajectory nearest-neighbour point forecaster.

    Parameters mirror the config surface: ``model`` is a point model
    name, ``distance`` a distance name, ``length`` the trajectory
    length, ``n_neighbors`` the candidate count, ``radius`` an optional
    slot-of-day filter half-width, ``outlier`` a candidate policy and
    ``step`` the forecast horizon in slots.
    """

    def __init__(self, model: str = "mean", distance: str = "weuclidean",
                 length: int = 14, n_neighbors: int = 25,
                 radius: int | None = None, outlier: str = "none",
                 step: int = 1):
        self.model = model
        self.distance = distance
        self.length = length
        self.n_neighbors = n_neighbors
        self.radius = radius
        self.outlier = outlier
        self.step = step

    def _parse_params(self) -> tuple[ModelSpec, int | None]:
        check_positive_int(self.length, "length")
        check_positive_int(self.n_neighbors, "n_neighbors")
        check_positive_int(self.step, "step")
        spec = parse_model(self.model)
        radius = spec.radius if spec.radius is not None else self.radius
        policy = parse_outlier(self.outlier)
        if spec.tag == "m3" and not policy.size_preserving:
            raise ValueError(
                "m3 needs a fixed candidate count; outlier policy "
                f"{policy.name!r} can drop candidates"
            )
        return spec, radius

    def fit(self, series: TimeSeries, split: SplitConfig,
            fit_queries: np.ndarray | None = None) -> "SimilarityForecaster":
        """Bind the forecaster to a series and split.

        ``split`` may have been built for another trajectory length; it
        is rebased onto the same target dates.  ``fit_queries`` narrows
        the tune queries used to train the global-weights model.
        """
        spec, radius = self._parse_params()
        split = split.rebase(self.length, self.step)
        if split.last + split.length + split.step - 1 > len(series):
            raise ValueError("split extends past the end of the series")
        self.model_spec_ = spec
        self.radius_ = radius
        self.series_ = series
        self.split_ = split
        self.values_ = series.values
        self.windows_ = window_matrix(self.values_, self.length)
        if spec.tag == "m3":
            self._fit_global(fit_queries)
        return self

    def _fit_global(self, fit_queries: np.ndarray | None) -> None:
        split = self.split_
        queries = split.queries("tune") if fit_queries is None else \
            np.asarray(fit_queries)
        rows, targets = [], []
        for q in queries:
            try:
                cand = self.candidates_for(int(q))
            except ValueError:
                continue
            if len(cand) < self.n_neighbors:
                continue  # short histories cannot fill a K-vector
            rows.append(cand.values)
            targets.append(self.values_[q + self.length + self.step - 2])
        if not rows:
            raise ValueError(
                "no tune query has enough candidates to train global weights"
            )
        self.weights_, self.used_ridge_ = fit_global_weights(
            np.vstack(rows), np.asarray(targets)
        )
        self.n_train_queries_ = len(rows)

    def _reference(self, query: int, side: str | None) -> np.ndarray:
        split = self.split_
        if side is None:
            lo = 1 if query < split.s else split.w
        elif side == "tune":
            lo = 1
        elif side == "test":
            lo = split.w
        else:
            raise ValueError(f"side must be 'tune', 'test' or None, got {side!r}")
        if lo > query - 1:
            raise ValueError(f"query {query} has an empty reference set")
        return np.arange(lo, query)

    def candidates_for(self, query: int, side: str | None = None) -> CandidateSet:
        """Post-policy candidate set for one query trajectory index."""
        reference = self._reference(query, side)
        if self.radius_ is not None:
            reference = seasonal_filter(
                reference,
                self.target_slot(query),
                self.radius_,
                start_slot=self.series_.start_slot,
                length=self.length,
                step=self.step,
            )
        cand = nearest_candidates(
            self.values_,
            length=self.length,
            step=self.step,
            kind=self.distance,
            k=self.n_neighbors,
            query=query,
            reference=reference,
        )
        return apply_outlier_policy(cand, self.outlier)

    def target_slot(self, query: int) -> int:
        """Slot-of-day of the target forecast by ``query``."""
        return self.series_.slot_of_day(query + self.length + self.step - 1)

    def _queries(self, side: str | None, indices) -> np.ndarray:
        if indices is None:
            if side is None:
                raise ValueError("need a side or explicit query indices")
            return self.split_.queries(side)
        indices = np.asarray(indices)
        if indices.size and (
            indices.min() < 1
            or indices.max() + self.length + self.step - 1 > len(self.series_)
        ):
            raise ValueError("query indices out of the forecastable range")
        return indices

    def _forecast_one(self, query: int, side: str | None) -> float:
        cand = self.candidates_for(query, side)
        spec = self.model_spec_
        if spec.tag == "mean":
            return forecast_mean(cand)
        if spec.tag == "m1":
            return forecast_rank_weighted(cand, spec.weight_fn)
        if spec.tag == "m2":
            return forecast_distance_weighted(cand, spec.weight_fn)
        if spec.tag == "m3":
            return forecast_global(cand, self.weights_)
        if spec.tag == "localreg":
            return forecast_local_regression(
                self.windows_[query - 1],
                self.windows_[cand.sources - 1],
                cand.values,
            )
        raise AssertionError(f"unhandled model tag {spec.tag}")

    def predict(self, side: str | None = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        """Point forecasts for a query range, in query order."""
        self._require_fitted()
        queries = self._queries(side, indices)
        return np.array([self._forecast_one(int(q), side) for q in queries])

    def predict_interval(self, side: str | None = "test",
                         indices: np.ndarray | None = None,
                         alpha: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
        """Similarity-based prediction intervals from candidate targets."""
        from .intervals import st_interval

        self._require_fitted()
        queries = self._queries(side, indices)
        lower = np.empty(queries.size)
        upper = np.empty(queries.size)
        for j, q in enumerate(queries):
            cand = self.candidates_for(int(q), side)
            lower[j], upper[j] = st_interval(cand.values, alpha)
        return lower, upper

    def actuals(self, side: str = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        """Observed target values aligned with :meth:`predict`."""
        self._require_fitted()
        queries = self._queries(side, indices)
        return self.values_[queries + self.length + self.step - 2]

    def _require_fitted(self) -> None:
        if not hasattr(self, "split_"):
            raise ValueError("forecaster is not fitted; call fit first")


class HourlyForecaster(BaseEstimator):
    """Bank of 24 per-hour forecaster configurations.

    ``bank`` maps hour-of-day 0..23 to SimilarityForecaster parameter
    dicts; each query is dispatched on the hour of its target.  The bank
    entries may use different trajectory lengths; all are rebased onto
    the same target dates.
    """

    def __init__(self, bank: list[dict]):
        self.bank = bank

    def fit(self, series: TimeSeries, split: SplitConfig) -> "HourlyForecaster":
        if len(self.bank) != 24:
            raise ValueError(f"bank must have 24 entries, got {len(self.bank)}")
        self.series_ = series
        self.split_ = split
        self.members_ = []
        tune = split.queries("tune")
        tune_hours = self._hours(split, tune)
        for hour, params in enumerate(self.bank):
            member = SimilarityForecaster(**params)
            shift = (split.length + split.step) - (member.length + member.step)
            member.fit(series, split,
                       fit_queries=tune[tune_hours == hour] + shift)
            self.members_.append(member)
        return self

    def _hours(self, split: SplitConfig, queries: np.ndarray) -> np.ndarray:
        targets = np.asarray(queries) + split.length + split.step - 1
        start_slot = self.series_.start_slot
        return ((start_slot + targets - 1) % 96) // 4

    def _resolve(self, side: str | None, indices) -> np.ndarray:
        if indices is None:
            if side is None:
                raise ValueError("need a side or explicit query indices")
            return self.split_.queries(side)
        return np.asarray(indices)

    def predict(self, side: str | None = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        indices = self._resolve(side, indices)
        hours = self._hours(self.split_, indices)
        out = np.empty(indices.size)
        for hour in np.unique(hours):
            member = self.members_[hour]
            shift = (self.split_.length + self.split_.step) - \
                (member.length + member.step)
            where = np.flatnonzero(hours == hour)
            out[where] = member.predict(side, indices[where] + shift)
        return out

    def predict_interval(self, side: str | None = "test",
                         indices: np.ndarray | None = None,
                         alpha: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
        indices = self._resolve(side, indices)
        hours = self._hours(self.split_, indices)
        lower = np.empty(indices.size)
        upper = np.empty(indices.size)
        for hour in np.unique(hours):
            member = self.members_[hour]
            shift = (self.split_.length + self.split_.step) - \
                (member.length + member.step)
            where = np.flatnonzero(hours == hour)
            lo, up = member.predict_interval(side, indices[where] + shift, alpha)
            lower[where], upper[where] = lo, up
        return lower, upper

    def actuals(self, side: str = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        indices = self._resolve(side, indices)
        return self.series_.values[indices + self.split_.length + self.split_.step - 2]
