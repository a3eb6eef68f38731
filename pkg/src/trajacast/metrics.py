"""Point and interval accuracy metrics, and the forecast comparison test.

Errors are ``forecast - actual``.  MAPE is in percent and reported as
NaN when any actual is zero.  Interval quality is unconditional coverage
(closed endpoints) plus the Winkler score.  ``dm_test`` compares two
aligned error sequences with a small-sample corrected normal test.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .validation import as_float_array, check_alpha, check_positive_int, \
    check_same_length

REPORT_COLUMNS = ("model", "split", "mae", "mape", "uc", "winkler", "n", "status")


@dataclass(frozen=True)
class PointEvaluation:
    mae: float
    mape: float
    n: int

    @property
    def mape_defined(self) -> bool:
        return not math.isnan(self.mape)


@dataclass(frozen=True)
class IntervalEvaluation:
    uc: float
    winkler: float
    n: int


@dataclass(frozen=True)
class DmResult:
    statistic: float
    p_value: float
    degenerate: bool
    n: int


def point_metrics(forecasts, actuals) -> PointEvaluation:
    forecasts = as_float_array(forecasts, "forecasts")
    actuals = as_float_array(actuals, "actuals")
    check_same_length(forecasts, actuals, "forecasts and actuals")
    err = np.abs(forecasts - actuals)
    mae = float(err.mean())
    if np.any(actuals == 0.0):
        mape = math.nan
    else:
        mape = float(100.0 * (err / np.abs(actuals)).mean())
    return PointEvaluation(mae=mae, mape=mape, n=forecasts.size)


def winkler_score(lower: float, upper: float, actual: float, alpha: float) -> float:
    """Interval width plus ``2 / alpha`` times the distance by which the
    actual escapes the interval."""
    alpha = check_alpha(alpha)
    if lower > upper:
        raise ValueError(f"interval bounds out of order: ({lower}, {upper})")
    width = upper - lower
    if actual < lower:
        return width + (2.0 / alpha) * (lower - actual)
    if actual > upper:
        return width + (2.0 / alpha) * (actual - upper)
    return width


def interval_metrics(lower, upper, actuals, alpha: float) -> IntervalEvaluation:
    alpha = check_alpha(alpha)
    lower = as_float_array(lower, "lower")
    upper = as_float_array(upper, "upper")
    actuals = as_float_array(actuals, "actuals")
    check_same_length(lower, actuals, "bounds and actuals")
    check_same_length(lower, upper, "lower and upper")
    if np.any(lower > upper):
        raise ValueError("interval bounds out of order")
    covered = (lower <= actuals) & (actuals <= upper)
    width = upper - lower
    penalty = np.where(
        actuals < lower, lower - actuals,
        np.where(actuals > upper, actuals - upper, 0.0),
    )
    scores = width + (2.0 / alpha) * penalty
    return IntervalEvaluation(
        uc=float(covered.mean()), winkler=float(scores.mean()), n=lower.size
    )


_LOSSES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "abs": np.abs,
    "squared": np.square,
}


def dm_test(errors_a, errors_b, loss: str | Callable = "abs",
            horizon: int = 1) -> DmResult:
    """Equal-accuracy test on two aligned forecast error sequences.

    The loss differential's long-run variance uses a rectangular kernel
    up to lag ``horizon - 1``, and the statistic carries the
    small-sample correction for multi-step forecasts.  A negative
    statistic favours the first model.  Degenerate variance gives
    p-value 1 for a zero mean differential, 0 otherwise.
    """
    horizon = check_positive_int(horizon, "horizon")
    fn = _LOSSES[loss] if isinstance(loss, str) else loss
    a = as_float_array(errors_a, "errors_a")
    b = as_float_array(errors_b, "errors_b")
    check_same_length(a, b, "error sequences")
    n = a.size
    if n < 30:
        raise ValueError(f"dm_test needs at least 30 observations, got {n}")
    d = fn(a) - fn(b)
    dbar = float(d.mean())
    centered = d - dbar
    gamma0 = float(centered @ centered) / n
    acc = gamma0
    for k in range(1, horizon):
        acc += 2.0 * float(centered[k:] @ centered[:-k]) / n
    if acc <= 0.0:
        if dbar == 0.0:
            return DmResult(statistic=0.0, p_value=1.0, degenerate=True, n=n)
        return DmResult(
            statistic=math.copysign(math.inf, dbar), p_value=0.0,
            degenerate=True, n=n,
        )
    stat = dbar / math.sqrt(acc / n)
    h = horizon
    correction = math.sqrt((n + 1 - 2 * h + h * (h - 1) / n) / n)
    stat *= correction
    p = math.erfc(abs(stat) / math.sqrt(2.0))
    return DmResult(statistic=float(stat), p_value=float(p), degenerate=False, n=n)


def write_summary(path: str | Path, rows: list[dict]) -> None:
    """Write metric report rows with the fixed column set."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in rows:
            clean = {}
            for col in REPORT_COLUMNS:
                value = row.get(col, "")
                if isinstance(value, float):
                    value = "NaN" if math.isnan(value) else format(value, ".6f")
                clean[col] = value
            writer.writerow(clean)
