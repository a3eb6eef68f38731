"""Hyperparameter grid search with deterministic leaderboards.

Cells combine model, distance, trajectory length, neighbour count,
seasonal radius, outlier policy and weight function.  Every cell is
scored on the tune queries; test metrics are reported but never drive
selection.  Cells that fail (for example a filter leaving no
candidates) rank last with their error message instead of failing the
whole search.  Results are byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .dataset import SplitConfig
from .forecast import (
    DISTANCE_WEIGHT_FUNCTIONS,
    RANK_WEIGHT_FUNCTIONS,
    SimilarityForecaster,
)
from .intervals import HistoricalSimulationInterval, MdstInterval
from .metrics import interval_metrics, point_metrics
from .series import SLOTS_PER_DAY, TimeSeries
from .validation import check_alpha, check_positive_int

POINT_MODELS = ("mean", "m1", "m2", "m3", "localreg")
INTERVAL_MODELS = ("st", "st-s", "hs", "hs-s", "mdst", "mdst-s")

LEADERBOARD_COLUMNS = (
    "rank", "model", "distance", "L", "K", "R", "outlier", "weight_fn",
    "tune_metric", "test_metric", "status",
)


@dataclass(frozen=True)
class GridCell:
    model: str
    distance: str
    length: int
    k: int
    radius: int | None
    outlier: str
    weight_fn: str | None

    def sort_key(self) -> tuple:
        return (
            self.model, self.distance, self.length, self.k,
            -1 if self.radius is None else self.radius,
            self.outlier, self.weight_fn or "",
        )

    def point_model_name(self) -> str:
        if self.weight_fn is not None:
            return f"{self.model}:{self.weight_fn}"
        return self.model


@dataclass(frozen=True)
class GridSpec:
    """Axes of the search; defaults follow the usual tuning ranges."""

    models: Sequence[str] = ("mean",)
    distances: Sequence[str] = ("weuclidean",)
    lengths: Sequence[int] = tuple(range(2, 21))
    neighbor_counts: Sequence[int] = (
        5, 10, 15, 20, 25, 30, 40, 50, 60, 80, 100, 125, 150, 175, 200,
    )
    radii: Sequence[int | None] = (None,)
    outliers: Sequence[str] = ("none",)
    weight_fns: Sequence[str] | None = None

    def cells(self) -> list[GridCell]:
        """Deterministic cell enumeration, sorted by hyperparameters."""
        out: list[GridCell] = []
        for model in self.models:
            if model not in POINT_MODELS + INTERVAL_MODELS:
                raise ValueError(f"unknown grid model {model!r}")
            if model == "m1":
                fns = [f for f in (self.weight_fns or RANK_WEIGHT_FUNCTIONS)
                       if f in RANK_WEIGHT_FUNCTIONS]
            elif model == "m2":
                fns = [g for g in (self.weight_fns or DISTANCE_WEIGHT_FUNCTIONS)
                       if g in DISTANCE_WEIGHT_FUNCTIONS]
            else:
                fns = [None]
            if not fns:
                raise ValueError(f"no weight functions provided for {model}")
            hs_like = model in ("hs", "hs-s")
            for distance in ("-",) if hs_like else self.distances:
                for length in self.lengths:
                    for k in (0,) if hs_like else self.neighbor_counts:
                        for radius in (None,) if hs_like else self.radii:
                            if model in ("st-s", "mdst-s") and radius is None:
                                continue
                            for outlier in (
                                ("none",) if hs_like or model.startswith("mdst")
                                else self.outliers
                            ):
                                for fn in fns:
                                    out.append(GridCell(
                                        model=model, distance=distance,
                                        length=length, k=k, radius=radius,
                                        outlier=outlier, weight_fn=fn,
                                    ))
        unique = sorted(set(out), key=GridCell.sort_key)
        if not unique:
            raise ValueError("grid is empty")
        return unique


@dataclass(frozen=True)
class GridRow:
    rank: int
    cell: GridCell
    tune_metric: float
    test_metric: float
    status: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class Leaderboard:
    rows: tuple[GridRow, ...]
    objective: str

    @property
    def selection(self) -> GridRow:
        """Winning row; selection depends on tune metrics only."""
        for row in self.rows:
            if row.ok:
                return row
        raise ValueError("every grid cell failed; nothing to select")

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(LEADERBOARD_COLUMNS)
            for row in self.rows:
                cell = row.cell
                writer.writerow([
                    row.rank,
                    cell.model,
                    cell.distance,
                    cell.length,
                    cell.k if cell.k else "-",
                    "-" if cell.radius is None else cell.radius,
                    cell.outlier,
                    cell.weight_fn or "-",
                    _fmt(row.tune_metric),
                    _fmt(row.test_metric),
                    row.status,
                ])


def _fmt(x: float) -> str:
    return "NaN" if math.isnan(x) else format(x, ".6f")


def build_cell_model(cell: GridCell, step: int = 1, base_params: dict | None = None):
    """Instantiate the estimator a grid cell describes."""
    if cell.model in POINT_MODELS or cell.model in ("st", "st-s"):
        name = cell.point_model_name()
        if cell.model in ("st", "st-s"):
            name = "mean"  # interval quality is independent of the point rule
        return SimilarityForecaster(
            model=name, distance=cell.distance, length=cell.length,
            n_neighbors=cell.k, radius=cell.radius, outlier=cell.outlier,
            step=step,
        )
    base = SimilarityForecaster(**(base_params or {}), step=step)
    if cell.model in ("hs", "hs-s"):
        return HistoricalSimulationInterval(
            base, window=cell.length, seasonal=cell.model == "hs-s"
        )
    if cell.model in ("mdst", "mdst-s"):
        return MdstInterval(
            base, distance=cell.distance, length=cell.length,
            n_neighbors=cell.k, radius=cell.radius,
        )
    raise ValueError(f"unknown grid model {cell.model!r}")


def _score(model, side: str, indices, objective: str, alpha: float) -> float:
    actuals = model.actuals(side, indices)
    if objective == "winkler":
        lower, upper = model.predict_interval(side, indices, alpha)
        return interval_metrics(lower, upper, actuals, alpha).winkler
    evaluation = point_metrics(model.predict(side, indices), actuals)
    return evaluation.mae if objective == "mae" else evaluation.mape


def _day_blocks(series: TimeSeries, split: SplitConfig, folds: int
                ) -> list[np.ndarray]:
    """Contiguous day blocks over the tune queries."""
    tune = split.queries("tune")
    targets = tune + split.length + split.step - 1
    days = (series.start_slot + targets - 1) // SLOTS_PER_DAY
    blocks = [b for b in np.array_split(np.unique(days), folds) if b.size]
    if len(blocks) < folds:
        raise ValueError(
            f"tune range spans {len(np.unique(days))} days; cannot make "
            f"{folds} day-block folds"
        )
    return [tune[np.isin(days, block)] for block in blocks]


def _evaluate_cell(
    cell: GridCell,
    series: TimeSeries,
    split: SplitConfig,
    objective: str,
    alpha: float,
    base_params: dict | None,
    folds: int,
    tune_queries: np.ndarray | None,
    test_queries: np.ndarray | None,
) -> tuple[GridCell, float, float, str]:
    try:
        if objective == "winkler" and cell.model in POINT_MODELS:
            raise ValueError(f"{cell.model} produces no interval to score")
        if objective != "winkler" and cell.model in INTERVAL_MODELS:
            raise ValueError(f"{cell.model} is interval-only")
        model = build_cell_model(cell, split.step, base_params)
        if folds > 1:
            blocks = _day_blocks(series, split, folds)
            if tune_queries is not None:
                blocks = [b[np.isin(b, tune_queries)] for b in blocks]
                blocks = [b for b in blocks if b.size]
                if not blocks:
                    raise ValueError("no tune queries left in any fold")
            fold_scores = []
            for held in blocks:
                if isinstance(model, SimilarityForecaster):
                    train = np.setdiff1d(split.queries("tune"), held)
                    model.fit(series, split, fit_queries=_shift(model, split, train))
                else:
                    model.fit(series, split)
                fold_scores.append(_score(
                    model, "tune", _shift(model, split, held), objective, alpha
                ))
            tune_metric = float(np.mean(fold_scores))
            model.fit(series, split)
        else:
            model.fit(series, split)
            tune_metric = _score(
                model, "tune", _shift(model, split, tune_queries),
                objective, alpha,
            )
        test_metric = _score(
            model, "test", _shift(model, split, test_queries), objective, alpha
        )
        return cell, tune_metric, test_metric, "ok"
    except Exception as exc:  # cell failure must not kill the search
        return cell, math.inf, math.nan, f"error: {exc}"


def _shift(model, split: SplitConfig, queries: np.ndarray | None):
    """Translate canonical query indices into the model's split frame."""
    if queries is None:
        return None
    target = model.base if hasattr(model, "base") else model
    length = getattr(target, "length", split.length)
    step = getattr(target, "step", split.step)
    shift = (split.length + split.step) - (length + step)
    return np.asarray(queries) + shift


def run_grid(
    series: TimeSeries,
    split: SplitConfig,
    spec: GridSpec,
    objective: str = "mae",
    alpha: float = 0.05,
    n_jobs: int = 1,
    base_params: dict | None = None,
    folds: int = 1,
    tune_queries: np.ndarray | None = None,
    test_queries: np.ndarray | None = None,
) -> Leaderboard:
    """Score every cell and rank them by the tune metric.

    ``folds > 1`` averages the tune metric over contiguous day-block
    cross-validation folds.  ``tune_queries`` / ``test_queries`` narrow
    evaluation to subsets of the split's query ranges (canonical frame).
    """
    if objective not in ("mae", "mape", "winkler"):
        raise ValueError(f"objective must be mae, mape or winkler, got {objective!r}")
    alpha = check_alpha(alpha)
    check_positive_int(folds, "folds")
    cells = spec.cells()
    results = Parallel(n_jobs=n_jobs)(
        delayed(_evaluate_cell)(
            cell, series, split, objective, alpha, base_params, folds,
            tune_queries, test_queries,
        )
        for cell in cells
    )
    ok = [r for r in results if r[3] == "ok"]
    bad = [r for r in results if r[3] != "ok"]
    ok.sort(key=lambda r: (r[1], r[0].sort_key()))
    bad.sort(key=lambda r: r[0].sort_key())
    rows = tuple(
        GridRow(rank=i + 1, cell=c, tune_metric=tm, test_metric=sm, status=st)
        for i, (c, tm, sm, st) in enumerate(ok + bad)
    )
    return Leaderboard(rows=rows, objective=objective)


def run_cv(
    series: TimeSeries,
    split: SplitConfig,
    spec: GridSpec,
    folds: int = 10,
    **kwargs,
) -> Leaderboard:
    """Grid search scored by day-block cross-validation on the tune side."""
    return run_grid(series, split, spec, folds=folds, **kwargs)


def tune_hourly(
    series: TimeSeries,
    split: SplitConfig,
    spec: GridSpec,
    folds: int = 10,
    objective: str = "mae",
    alpha: float = 0.05,
    n_jobs: int = 1,
) -> tuple[list[dict], dict[int, Leaderboard]]:
    """Select one cell per hour of day; returns the 24-entry parameter
    bank for :class:`HourlyForecaster` plus each hour's leaderboard."""
    for model in spec.models:
        if model not in POINT_MODELS:
            raise ValueError("hourly tuning expects point models only")
    tune = split.queries("tune")
    test = split.queries("test")
    tune_hours = _hours(series, split, tune)
    test_hours = _hours(series, split, test)
    bank: list[dict] = []
    boards: dict[int, Leaderboard] = {}
    for hour in range(24):
        board = run_grid(
            series, split, spec, objective=objective, alpha=alpha,
            n_jobs=n_jobs, folds=folds,
            tune_queries=tune[tune_hours == hour],
            test_queries=test[test_hours == hour],
        )
        boards[hour] = board
        cell = board.selection.cell
        bank.append(dict(
            model=cell.point_model_name(), distance=cell.distance,
            length=cell.length, n_neighbors=cell.k, radius=cell.radius,
            outlier=cell.outlier, step=split.step,
        ))
    return bank, boards


def _hours(series: TimeSeries, split: SplitConfig, queries: np.ndarray
           ) -> np.ndarray:
    targets = queries + split.length + split.step - 1
    return ((series.start_slot + targets - 1) % SLOTS_PER_DAY) // 4
