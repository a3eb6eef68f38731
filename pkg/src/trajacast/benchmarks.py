"""Reference forecasters the similarity models are judged against.

Config names: ``naive``, ``snaive:<period>:<depth>`` and ``ar:<p>``.
All three expose the same ``fit(series, split)`` / ``predict(side)``
surface as the similarity forecasters so they drop into the same
evaluation harness.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._linalg import least_squares
from .dataset import SplitConfig
from .series import TimeSeries
from .validation import check_positive_int


def naive_forecast(values: np.ndarray, t: int) -> float:
    """One-step naive forecast of 1-based position ``t``: the previous value."""
    if t < 2 or t > len(values):
        raise ValueError(f"naive forecast needs 2 <= t <= {len(values)}, got {t}")
    return float(values[t - 2])


def seasonal_naive_forecast(values: np.ndarray, t: int, period: int = 96,
                            depth: int = 1) -> float:
    """Mean of the values one to ``depth`` periods before position ``t``."""
    check_positive_int(period, "period")
    check_positive_int(depth, "depth")
    if t <= period:
        raise ValueError(f"seasonal naive needs t > period, got t={t}")
    donors = [t - period * j for j in range(1, depth + 1) if t - period * j >= 1]
    return float(np.mean([values[d - 1] for d in donors]))


def fit_ar(values: np.ndarray, order: int, intercept: bool = True) -> np.ndarray:
    """Least-squares AR coefficients; the intercept, when used, is last."""
    order = check_positive_int(order, "order")
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < order + 2:
        raise ValueError(f"need more than {order + 1} values to fit ar:{order}")
    rows = n - order
    design = np.empty((rows, order + int(intercept)))
    for lag in range(1, order + 1):
        design[:, lag - 1] = values[order - lag : n - lag]
    if intercept:
        design[:, order] = 1.0
    coef, _ = least_squares(design, values[order:])
    return coef


def ar_forecast(history: np.ndarray, coef: np.ndarray, order: int,
                steps: int = 1, intercept: bool = True) -> float:
    """Iterated AR forecast ``steps`` ahead of the end of ``history``.

    Multi-step forecasts feed earlier forecasts back in as lag values.
    """
    check_positive_int(steps, "steps")
    history = np.asarray(history, dtype=np.float64)
    if history.size < order:
        raise ValueError(f"need {order} lag values, got {history.size}")
    lags = list(history[-order:][::-1])  # most recent first
    const = float(coef[order]) if intercept else 0.0
    for _ in range(steps):
        nxt = const + float(np.dot(coef[:order], lags))
        lags = [nxt] + lags[: order - 1]
    return nxt


class _HistoryForecaster(BaseEstimator):
    """Shared harness plumbing: resolve queries, map them to targets."""

    def fit(self, series: TimeSeries, split: SplitConfig):
        self.series_ = series
        self.split_ = split
        self._prepare()
        return self

    def _prepare(self) -> None:
        pass

    def _resolve(self, side: str | None, indices) -> np.ndarray:
        if indices is None:
            if side is None:
                raise ValueError("need a side or explicit query indices")
            return self.split_.queries(side)
        return np.asarray(indices)

    def predict(self, side: str | None = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        queries = self._resolve(side, indices)
        split = self.split_
        targets = queries + split.length + split.step - 1
        return np.array(
            [self._forecast_target(int(p)) for p in targets]
        )

    def actuals(self, side: str = "test",
                indices: np.ndarray | None = None) -> np.ndarray:
        queries = self._resolve(side, indices)
        split = self.split_
        return self.series_.values[queries + split.length + split.step - 2]

    def _forecast_target(self, target: int) -> float:
        raise NotImplementedError


class NaiveForecaster(_HistoryForecaster):
    """Forecast any horizon with the last value observed at the origin."""

    def _forecast_target(self, target: int) -> float:
        origin = target - self.split_.step
        return naive_forecast(self.series_.values, origin + 1)


class SeasonalNaiveForecaster(_HistoryForecaster):
    def __init__(self, period: int = 96, depth: int = 1):
        self.period = period
        self.depth = depth

    def _forecast_target(self, target: int) -> float:
        return seasonal_naive_forecast(
            self.series_.values, target, self.period, self.depth
        )


class ARForecaster(_HistoryForecaster):
    """Autoregression fitted once on the data before the first test target.

    Both sides then share the coefficients, so tune-side numbers are
    mildly in-sample; test-side forecasts never see test data.
    """

    def __init__(self, order: int = 9, intercept: bool = True):
        self.order = order
        self.intercept = intercept

    def _prepare(self) -> None:
        split = self.split_
        first_test_target = split.s + split.length + split.step - 1
        train_end = first_test_target - split.step  # last pre-test origin
        self.coef_ = fit_ar(
            self.series_.values[:train_end], self.order, self.intercept
        )

    def _forecast_target(self, target: int) -> float:
        origin = target - self.split_.step
        if origin < self.order:
            raise ValueError(
                f"target {target} lacks {self.order} lag values at its origin"
            )
        return ar_forecast(
            self.series_.values[:origin], self.coef_, self.order,
            steps=self.split_.step, intercept=self.intercept,
        )


def parse_benchmark(name: str, ar_intercept: bool = True):
    """Build a benchmark estimator from its config name."""
    parts = str(name).strip().split(":")
    if parts[0] == "naive" and len(parts) == 1:
        return NaiveForecaster()
    if parts[0] == "snaive" and len(parts) == 3:
        return SeasonalNaiveForecaster(int(parts[1]), int(parts[2]))
    if parts[0] == "ar" and len(parts) == 2:
        return ARForecaster(order=int(parts[1]), intercept=ar_intercept)
    raise ValueError(
        f"unknown benchmark {name!r}; expected naive, snaive:<period>:<depth> "
        "or ar:<p>"
    )
