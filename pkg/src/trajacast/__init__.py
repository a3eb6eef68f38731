"""Trajectory-similarity forecasting for 15-minute flow series."""

from .benchmarks import (
    ARForecaster,
    NaiveForecaster,
    SeasonalNaiveForecaster,
    ar_forecast,
    fit_ar,
    naive_forecast,
    parse_benchmark,
    seasonal_naive_forecast,
)
from .dataset import (
    SplitConfig,
    TrajectoryView,
    build_split,
    make_trajectories,
    reference_for,
    split_from_indices,
)
from .distances import (
    DistanceKind,
    distance,
    lcs_length,
    paired_distance,
    parse_distance,
    recentness_weights,
)
from .forecast import (
    HourlyForecaster,
    SimilarityForecaster,
    fit_global_weights,
    forecast_distance_weighted,
    forecast_global,
    forecast_local_regression,
    forecast_mean,
    forecast_rank_weighted,
    parse_model,
)
from .gridsearch import GridSpec, Leaderboard, run_cv, run_grid, tune_hourly
from .ingestion import (
    ImputationReport,
    IngestionError,
    RawSeries,
    aggregate_15min,
    impute_missing,
    parse_csv,
)
from .intervals import (
    HistoricalSimulationInterval,
    MdstInterval,
    hs_interval,
    mdst_interval,
    sample_quantile,
    st_interval,
)
from .metrics import (
    DmResult,
    IntervalEvaluation,
    PointEvaluation,
    dm_test,
    interval_metrics,
    point_metrics,
    winkler_score,
)
from .neighbors import (
    CandidateSet,
    EmptyReferenceError,
    k_nearest,
    nearest_candidates,
    seasonal_filter,
)
from .outliers import (
    OutlierPolicy,
    apply_outlier_policy,
    parse_outlier,
    tail_remove,
    winsorize,
    zscore_remove,
)
from .series import TimeSeries, load_series, save_series
from .synthdata import SynthSpec, generate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
