"""Prediction intervals around point forecasts.

Three families share one quantile rule:

* similarity (``st``): quantiles of the query's candidate target values,
  produced by ``SimilarityForecaster.predict_interval``;
* historical simulation (``hs``): point forecast plus quantiles of the
  model's own recent errors (:class:`HistoricalSimulationInterval`);
* error-similarity (``mdst``): point forecast plus quantiles of the
  next-errors found by a nearest-neighbour search over the model's
  error history (:class:`MdstInterval`).

Seasonal variants restrict the pools by slot-of-day.  Errors are
``forecast - actual`` throughout.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from .dataset import SplitConfig
from .neighbors import nearest_candidates, seasonal_filter
from .series import SLOTS_PER_DAY, TimeSeries
from .validation import as_float_array, check_alpha, check_positive_int

_INTEGER_SNAP = 1e-9


def sample_quantile(values: np.ndarray, q: float) -> float:
    """Order-statistic quantile at position ``q * (N + 1)``.

    An integer position returns that order statistic exactly; otherwise
    the two bracketing order statistics are interpolated linearly.
    Positions outside ``1..N`` clamp to the extreme values.
    """
    values = as_float_array(values, "values")
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    ranked = np.sort(values)
    n = ranked.size
    pos = q * (n + 1)
    nearest = round(pos)
    if abs(pos - nearest) <= _INTEGER_SNAP:
        pos = float(nearest)
    if pos <= 1.0:
        return float(ranked[0])
    if pos >= n:
        return float(ranked[-1])
    if pos == int(pos):
        return float(ranked[int(pos) - 1])
    lo = math.floor(pos)
    hi = lo + 1
    c_hi = pos - lo
    c_lo = hi - pos
    return float(c_lo * ranked[lo - 1] + c_hi * ranked[hi - 1])


def st_interval(candidate_values: np.ndarray, alpha: float) -> tuple[float, float]:
    """Interval from the candidate targets themselves."""
    alpha = check_alpha(alpha)
    candidate_values = as_float_array(candidate_values, "candidate_values")
    if candidate_values.size < 2:
        raise ValueError("need at least 2 candidate values for an interval")
    return (
        sample_quantile(candidate_values, alpha / 2),
        sample_quantile(candidate_values, 1 - alpha / 2),
    )


def hs_interval(forecast: float, errors: np.ndarray, alpha: float
                ) -> tuple[float, float]:
    """Interval from the forecast plus quantiles of recent errors."""
    alpha = check_alpha(alpha)
    errors = as_float_array(errors, "errors")
    if errors.size < 2:
        raise ValueError("need at least 2 errors for an interval")
    return (
        forecast + sample_quantile(errors, alpha / 2),
        forecast + sample_quantile(errors, 1 - alpha / 2),
    )


def mdst_interval(forecast: float, candidate_errors: np.ndarray, alpha: float
                  ) -> tuple[float, float]:
    """Interval from the forecast plus quantiles of neighbour next-errors."""
    return hs_interval(forecast, candidate_errors, alpha)


def _error_history(base, series: TimeSeries, split: SplitConfig
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Per-query forecasts and errors over trajectories ``2 .. last``.

    Queries the base model cannot serve (for example, not enough
    candidates early in the series) yield NaN instead of failing the
    whole history.
    """
    indices = np.arange(2, split.last + 1)
    forecasts = np.full(indices.size, np.nan)
    for j, q in enumerate(indices):
        try:
            forecasts[j] = base.predict(side=None, indices=[int(q)])[0]
        except ValueError:
            continue
    actuals = series.values[indices + split.length + split.step - 2]
    return forecasts, forecasts - actuals


class HistoricalSimulationInterval(BaseEstimator):
    """Rolling-error interval around any point forecaster.

    ``window`` errors feed each interval: the most recent ones, or with
    ``seasonal=True`` the errors at the same slot-of-day on the previous
    ``window`` days.
    """

    def __init__(self, base, window: int = 60, seasonal: bool = False):
        self.base = base
        self.window = window
        self.seasonal = seasonal

    def fit(self, series: TimeSeries, split: SplitConfig
            ) -> "HistoricalSimulationInterval":
        check_positive_int(self.window, "window")
        if self.window < 2:
            raise ValueError("window must be >= 2 for an interval")
        self.base.fit(series, split)
        self.series_ = series
        self.split_ = self.base.split_
        self.forecasts_, self.errors_ = _error_history(
            self.base, series, self.split_
        )
        return self

    def _window_errors(self, query: int) -> np.ndarray:
        # errors_ is indexed by trajectory - 2
        if self.seasonal:
            picks = query - SLOTS_PER_DAY * np.arange(self.window, 0, -1)
        else:
            picks = np.arange(query - self.window, query)
        if picks[0] < 2:
            raise ValueError(
                f"query {query} lacks {self.window} "
                f"{'same-slot ' if self.seasonal else ''}past errors"
            )
        window = self.errors_[picks - 2]
        if not np.all(np.isfinite(window)):
            raise ValueError(
                f"base model has gaps in its error history before query {query}"
            )
        return window

    def predict(self, side: str | None = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        return self.base.predict(side, indices)

    def predict_interval(self, side: str | None = "test",
                         indices: np.ndarray | None = None,
                         alpha: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
        if indices is None:
            indices = self.split_.queries(side)
        indices = np.asarray(indices)
        lower = np.empty(indices.size)
        upper = np.empty(indices.size)
        for j, q in enumerate(indices):
            q = int(q)
            forecast = self.forecasts_[q - 2]
            if not np.isfinite(forecast):
                raise ValueError(f"base model cannot forecast query {q}")
            lower[j], upper[j] = hs_interval(
                forecast, self._window_errors(q), alpha
            )
        return lower, upper

    def actuals(self, side: str = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        return self.base.actuals(side, indices)


class MdstInterval(BaseEstimator):
    """Nearest-neighbour interval over the base model's error history.

    The last ``length`` errors before a query form an error trajectory;
    its nearest neighbours among earlier error trajectories vote with
    their next-errors.  ``radius`` optionally restricts neighbours to
    next-errors within that many slots-of-day of the query target.
    """

    def __init__(self, base, distance: str = "weuclidean", length: int = 8,
                 n_neighbors: int = 220, radius: int | None = None):
        self.base = base
        self.distance = distance
        self.length = length
        self.n_neighbors = n_neighbors
        self.radius = radius

    def fit(self, series: TimeSeries, split: SplitConfig) -> "MdstInterval":
        check_positive_int(self.length, "length")
        check_positive_int(self.n_neighbors, "n_neighbors")
        self.base.fit(series, split)
        self.series_ = series
        self.split_ = self.base.split_
        self.forecasts_, self.errors_ = _error_history(
            self.base, series, self.split_
        )
        # Drop any leading stretch the base model could not forecast so
        # the search runs over an unbroken error history.
        bad = np.flatnonzero(~np.isfinite(self.errors_))
        trim = int(bad.max()) + 1 if bad.size else 0
        if self.errors_.size - trim < self.length + 2:
            raise ValueError(
                "error history too short for the requested trajectory length"
            )
        self.history_ = self.errors_[trim:]
        # series position of history_[0]; slot arithmetic hangs off it
        self.error_start_pos_ = 2 + trim + self.split_.length + self.split_.step - 1
        return self

    def predict(self, side: str | None = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        return self.base.predict(side, indices)

    def _candidate_errors(self, query: int, target_pos: int) -> np.ndarray:
        # error-history index (1-based) of the query target's own error
        ip = target_pos - self.error_start_pos_ + 1
        qe = ip - self.length
        if qe < 2:
            raise ValueError(
                f"query {query} lacks {self.length} + 1 past errors"
            )
        history = self.history_[: ip - 1]
        reference = np.arange(1, qe)
        if self.radius is not None:
            reference = seasonal_filter(
                reference,
                self.series_.slot_of_day(target_pos),
                self.radius,
                start_slot=self.series_.slot_of_day(self.error_start_pos_),
                length=self.length,
                step=1,
            )
        cand = nearest_candidates(
            history,
            length=self.length,
            step=1,
            kind=self.distance,
            k=self.n_neighbors,
            query=qe,
            reference=reference,
        )
        return cand.values

    def predict_interval(self, side: str | None = "test",
                         indices: np.ndarray | None = None,
                         alpha: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
        if indices is None:
            indices = self.split_.queries(side)
        indices = np.asarray(indices)
        split = self.split_
        lower = np.empty(indices.size)
        upper = np.empty(indices.size)
        for j, q in enumerate(indices):
            q = int(q)
            forecast = self.forecasts_[q - 2]
            if not np.isfinite(forecast):
                raise ValueError(f"base model cannot forecast query {q}")
            target_pos = q + split.length + split.step - 1
            errors = self._candidate_errors(q, target_pos)
            if errors.size < 2:
                raise ValueError(
                    f"query {q} has fewer than 2 error neighbours"
                )
            lower[j], upper[j] = mdst_interval(forecast, errors, alpha)
        return lower, upper

    def actuals(self, side: str = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        return self.base.actuals(side, indices)
