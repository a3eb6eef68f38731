"""Command line interface.

Subcommands: ``ingest`` (raw CSV to clean series), ``split`` (date-based
tune/test split), ``tune`` (hyperparameter search), ``run`` (forecast,
intervals, metric reports), ``compare`` (equal-accuracy tests on saved
forecasts) and ``synth`` (synthetic series).

Every subcommand accepts ``--config FILE`` holding ``key = value``
lines; keys are the long flag names.  Explicit flags override the file.
Worker counts come from ``--jobs`` or the ``TRAJACAST_JOBS`` variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from datetime import datetime
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .benchmarks import parse_benchmark
from .dataset import SplitConfig, W_POLICIES, build_split
from .forecast import HourlyForecaster, SimilarityForecaster, parse_model
from .gridsearch import GridSpec, run_grid, tune_hourly
from .ingestion import IngestionError, aggregate_15min, impute_missing, parse_csv
from .intervals import HistoricalSimulationInterval, MdstInterval
from .metrics import dm_test, interval_metrics, point_metrics, write_summary
from .series import TIMESTAMP_FORMAT, TimeSeries, load_series, save_series
from .synthdata import KINDS, SynthSpec, generate

INTERVAL_METHODS = ("none", "st", "st-s", "st-hourly", "hs", "hs-s", "mdst", "mdst-s")


def _parse_when(text: str) -> datetime:
    for fmt in (TIMESTAMP_FORMAT, "%Y-%m-%d %H:%M", "%Y-%m-%d"):
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise argparse.ArgumentTypeError(f"unparseable date {text!r}")


def _comma_list(text: str) -> list[str]:
    return [part.strip() for part in str(text).split(",") if part.strip()]


def _comma_ints(text: str) -> list[int]:
    return [int(part) for part in _comma_list(text)]


def _comma_floats(text: str) -> list[float]:
    return [float(part) for part in _comma_list(text)]


def _comma_radii(text: str) -> list[int | None]:
    out: list[int | None] = []
    for part in _comma_list(text):
        out.append(None if part.lower() == "none" else int(part))
    return out


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` file; keys use the long flag spelling."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(subparser: argparse.ArgumentParser, overrides: dict[str, str]
                  ) -> None:
    known = {}
    for action in subparser._actions:
        known[action.dest] = action
    for key, value in overrides.items():
        if key == "config" or key not in known:
            raise ValueError(f"unknown config key {key.replace('_', '-')!r}")
        action = known[key]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            parsed = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            parsed = action.type(value)
        else:
            parsed = value
        subparser.set_defaults(**{key: parsed})


def _jobs(args) -> int:
    if args.jobs is not None:
        return args.jobs
    return int(os.environ.get("TRAJACAST_JOBS", "1"))


def _fmt(x: float) -> str:
    return "NaN" if (isinstance(x, float) and math.isnan(x)) else format(x, ".6f")


def _sanitize(name: str) -> str:
    return name.replace(":", "-").replace("+", "_")


# ---------------------------------------------------------------- subcommands


def cmd_synth(args) -> int:
    spec = SynthSpec(
        kind=args.kind, length=args.length, seed=args.seed, start=args.start,
        amplitude=args.amplitude, noise_sd=args.noise_sd, offset=args.offset,
        period=args.period, coeffs=tuple(args.coeffs), x0=tuple(args.x0),
        ar_intercept=args.ar_intercept,
    )
    series = generate(spec)
    save_series(series, args.out)
    print(f"wrote {args.out}: {len(series)} slots from "
          f"{series.start.strftime(TIMESTAMP_FORMAT)}")
    return 0


def cmd_ingest(args) -> int:
    try:
        raw = parse_csv(args.input, ts_col=args.ts_col, flow_col=args.flow_col,
                        ts_format=args.ts_format)
        fifteen = aggregate_15min(raw)
        series, report = impute_missing(fifteen)
    except IngestionError as exc:
        print(f"ingest error: {exc}", file=sys.stderr)
        return 1
    save_series(series, args.out)
    lines = [
        f"rows(5min): {len(raw)}",
        f"slots(15min): {len(series)}",
        f"missing(15min): {fifteen.n_missing}",
        *report.lines(),
    ]
    text = "\n".join(lines)
    print(text)
    if args.report:
        Path(args.report).write_text(text + "\n")
    return 0


def _split_from_args(args, series: TimeSeries) -> SplitConfig:
    if getattr(args, "split_json", None):
        payload = json.loads(Path(args.split_json).read_text())
        return SplitConfig(**payload)
    missing = [flag for flag, value in (
        ("--tune-start", args.tune_start), ("--test-start", args.test_start),
    ) if value is None]
    if missing:
        raise ValueError(f"need {' and '.join(missing)} (or --split-json)")
    return build_split(
        series, args.length, args.tune_start, args.test_start,
        test_end=args.test_end, step=args.step, w_policy=args.w_policy,
    )


def cmd_split(args) -> int:
    series = load_series(args.series)
    try:
        split = _split_from_args(args, series)
    except ValueError as exc:
        print(f"split error: {exc}", file=sys.stderr)
        return 1
    payload = dict(u=split.u, s=split.s, w=split.w, last=split.last,
                   length=split.length, step=split.step)
    print(json.dumps(payload, indent=2))
    print(f"tune queries: {split.tune_size}  test queries: {split.test_size}",
          file=sys.stderr)
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_tune(args) -> int:
    series = load_series(args.series)
    try:
        split = _split_from_args(args, series)
    except ValueError as exc:
        print(f"tune error: {exc}", file=sys.stderr)
        return 1
    spec = GridSpec(
        models=tuple(args.models),
        distances=tuple(args.distances),
        lengths=tuple(args.lengths),
        neighbor_counts=tuple(args.ks),
        radii=tuple(args.radii),
        outliers=tuple(args.outliers),
        weight_fns=tuple(args.weights) if args.weights else None,
    )
    jobs = _jobs(args)
    if args.hourly:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        bank, boards = tune_hourly(
            series, split, spec, folds=args.folds, objective=args.objective,
            alpha=args.alpha, n_jobs=jobs,
        )
        for hour, board in boards.items():
            board.to_csv(outdir / f"leaderboard_h{hour:02d}.csv")
        (outdir / "bank.json").write_text(json.dumps(bank, indent=2) + "\n")
        print(f"wrote hourly bank and 24 leaderboards to {outdir}")
        return 0
    board = run_grid(
        series, split, spec, objective=args.objective, alpha=args.alpha,
        n_jobs=jobs, folds=args.folds,
    )
    board.to_csv(args.out)
    best = board.selection
    print(f"wrote {args.out}: {len(board.rows)} cells, best "
          f"{best.cell.point_model_name()} distance={best.cell.distance} "
          f"L={best.cell.length} K={best.cell.k} "
          f"tune_{args.objective}={_fmt(best.tune_metric)}")
    return 0


def _build_point_model(model_id: str, args, step: int):
    if model_id == "hourly":
        if not args.bank:
            raise ValueError("model 'hourly' needs --bank <bank.json>")
        bank = json.loads(Path(args.bank).read_text())
        return HourlyForecaster(bank)
    head = model_id.split(":", 1)[0].split("+", 1)[0]
    if head in ("naive", "snaive", "ar"):
        return parse_benchmark(model_id, ar_intercept=not args.ar_no_intercept)
    parse_model(model_id)  # validate early, before fitting anything
    return SimilarityForecaster(
        model=model_id, distance=args.distance, length=args.length,
        n_neighbors=args.k, radius=args.radius, outlier=args.outlier,
        step=step,
    )


class _SkipPair(Exception):
    """Interval method does not apply to this model; not a failure."""


def _attach_interval(model, method: str, args):
    """Return an object with predict/predict_interval/actuals for the pair."""
    if method == "none":
        return model
    if method in ("st", "st-s", "st-hourly"):
        if not hasattr(model, "predict_interval"):
            raise _SkipPair(f"{method} needs a similarity model")
        if method == "st-s" and getattr(model, "radius", None) is None \
                and not isinstance(model, HourlyForecaster):
            raise _SkipPair("st-s needs a seasonal model; set --radius")
        if method == "st-hourly" and not isinstance(model, HourlyForecaster):
            raise _SkipPair("st-hourly needs the hourly model")
        return model
    if method in ("hs", "hs-s"):
        return HistoricalSimulationInterval(
            model, window=args.hs_window, seasonal=method == "hs-s"
        )
    if method in ("mdst", "mdst-s"):
        radius = args.mdst_radius if method == "mdst-s" else None
        return MdstInterval(
            model, distance=args.distance, length=args.mdst_length,
            n_neighbors=args.mdst_k, radius=radius,
        )
    raise ValueError(f"unknown interval method {method!r}")


def _evaluate_pair(model_id: str, method: str, args, series, split):
    """Fit one model+interval pair; returns summary rows and the test frame."""
    rows: list[dict] = []
    try:
        model = _build_point_model(model_id, args, split.step)
        wrapped = _attach_interval(model, method, args)
        wrapped.fit(series, split)
        label = model_id if method == "none" else f"{model_id}+{method}"
        frame = None
        test_errors = None
        for side in ("tune", "test"):
            forecasts = wrapped.predict(side)
            actuals = wrapped.actuals(side)
            point = point_metrics(forecasts, actuals)
            row = dict(model=label, split=side, mae=point.mae, mape=point.mape,
                       uc="", winkler="", n=point.n, status="ok")
            if method != "none":
                lower, upper = wrapped.predict_interval(side, alpha=args.alpha)
                ival = interval_metrics(lower, upper, actuals, args.alpha)
                row["uc"], row["winkler"] = ival.uc, ival.winkler
            else:
                lower = upper = None
            if side == "test":
                targets = _canonical_targets(split)
                frame = (targets, actuals, forecasts, lower, upper)
                test_errors = forecasts - actuals
            rows.append(row)
        return label, rows, frame, test_errors, None
    except _SkipPair as exc:
        label = f"{model_id}+{method}"
        rows = [dict(model=label, split=side, mae=math.nan, mape=math.nan,
                     uc="", winkler="", n=0, status=f"skipped: {exc}")
                for side in ("tune", "test")]
        return label, rows, None, None, None
    except Exception as exc:
        label = model_id if method == "none" else f"{model_id}+{method}"
        rows = [dict(model=label, split=side, mae=math.nan, mape=math.nan,
                     uc="", winkler="", n=0, status=f"error: {exc}")
                for side in ("tune", "test")]
        return label, rows, None, None, str(exc)


def _canonical_targets(split: SplitConfig) -> np.ndarray:
    return split.queries("test") + split.length + split.step - 1


def _write_frame(path: Path, frame) -> None:
    targets, actuals, forecasts, lower, upper = frame
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "actual", "forecast", "lower", "upper"])
        for i, t in enumerate(targets):
            row = [int(t), _fmt(float(actuals[i])), _fmt(float(forecasts[i]))]
            if lower is not None:
                row += [_fmt(float(lower[i])), _fmt(float(upper[i]))]
            else:
                row += ["", ""]
            writer.writerow(row)


def _dm_matrix_csv(path: Path, names: list[str], errors: dict[str, np.ndarray],
                   loss: str, horizon: int) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model"] + names)
        for a in names:
            row = [a]
            for b in names:
                if a == b:
                    row.append("n/a")
                else:
                    res = dm_test(errors[a], errors[b], loss=loss, horizon=horizon)
                    row.append(_fmt(res.p_value))
            writer.writerow(row)


def _hours_of_targets(series: TimeSeries, targets: np.ndarray) -> np.ndarray:
    return ((series.start_slot + targets - 1) % 96) // 4


def cmd_run(args) -> int:
    series = load_series(args.series)
    try:
        split = _split_from_args(args, series)
    except ValueError as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return 1
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    methods = args.intervals
    for method in methods:
        if method not in INTERVAL_METHODS:
            print(f"run error: unknown interval method {method!r}",
                  file=sys.stderr)
            return 1
    pairs = [(model_id, method) for model_id in args.models for method in methods]

    jobs = _jobs(args)
    results = Parallel(n_jobs=jobs)(
        delayed(_evaluate_pair)(model_id, method, args, series, split)
        for model_id, method in pairs
    )

    summary_rows: list[dict] = []
    point_errors: dict[str, np.ndarray] = {}
    point_forecasts: dict[str, np.ndarray] = {}
    failed = False
    for (model_id, method), (label, rows, frame, test_errors, err) in \
            zip(pairs, results):
        summary_rows.extend(rows)
        if err is not None:
            failed = True
        if frame is None:
            continue
        _write_frame(outdir / f"forecasts_{_sanitize(label)}.csv", frame)
        if model_id not in point_errors:
            point_errors[model_id] = test_errors
            point_forecasts[model_id] = frame[2]
    write_summary(outdir / "summary.csv", summary_rows)

    names = [m for m in args.models if m in point_errors]
    if args.dm:
        if names:
            _dm_matrix_csv(outdir / "dm_matrix.csv", names, point_errors,
                           args.loss, split.step)
        if args.hourly and names:
            targets = _canonical_targets(split)
            hours = _hours_of_targets(series, targets)
            with open(outdir / "dm_hourly.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["hour", "model_a", "model_b", "statistic",
                                 "p_value"])
                for hour in range(24):
                    mask = hours == hour
                    if mask.sum() < 30:
                        continue
                    for a in names:
                        for b in names:
                            if a >= b:
                                continue
                            res = dm_test(point_errors[a][mask],
                                          point_errors[b][mask],
                                          loss=args.loss, horizon=split.step)
                            writer.writerow([hour, a, b, _fmt(res.statistic),
                                             _fmt(res.p_value)])
    if args.hourly and names:
        targets = _canonical_targets(split)
        hours = _hours_of_targets(series, targets)
        actual_vals = series.values[targets - 1]
        with open(outdir / "hourly_metrics.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "hour", "mae", "mape", "n"])
            for name in names:
                for hour in range(24):
                    mask = hours == hour
                    if not mask.any():
                        continue
                    ev = point_metrics(point_forecasts[name][mask],
                                       actual_vals[mask])
                    writer.writerow([name, hour, _fmt(ev.mae), _fmt(ev.mape),
                                     ev.n])
    print(f"wrote reports to {outdir}")
    return 1 if failed else 0


def cmd_compare(args) -> int:
    frames = {}
    for path in args.forecasts:
        name = Path(path).stem.removeprefix("forecasts_")
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            t, actual, forecast = [], [], []
            for row in reader:
                t.append(int(row["t"]))
                actual.append(float(row["actual"]))
                forecast.append(float(row["forecast"]))
        frames[name] = (np.asarray(t), np.asarray(actual), np.asarray(forecast))
    names = list(frames)
    if len(names) < 2:
        print("compare error: need at least two forecast files", file=sys.stderr)
        return 1
    common = frames[names[0]][0]
    for name in names[1:]:
        common = np.intersect1d(common, frames[name][0])
    if common.size < 30:
        print(f"compare error: only {common.size} shared timestamps",
              file=sys.stderr)
        return 1
    errors = {}
    for name in names:
        t, actual, forecast = frames[name]
        keep = np.isin(t, common)
        errors[name] = (forecast - actual)[keep]
    _dm_matrix_csv(Path(args.out), names, errors, args.loss, args.horizon)
    print(f"wrote {args.out}: {len(names)} models on {common.size} shared points")
    return 0


# -------------------------------------------------------------------- parser


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--length", type=int, default=14,
                   help="trajectory length L (default 14)")
    p.add_argument("--step", type=int, default=1,
                   help="forecast step in slots (default 1)")
    p.add_argument("--tune-start", type=_parse_when, default=None,
                   help="first timestamp forecast on the tune side")
    p.add_argument("--test-start", type=_parse_when, default=None,
                   help="first timestamp forecast on the test side")
    p.add_argument("--test-end", type=_parse_when, default=None,
                   help="last timestamp forecast (default: series end)")
    p.add_argument("--w-policy", choices=W_POLICIES, default="equal",
                   help="test reference floor policy (default equal)")
    p.add_argument("--split-json", default=None,
                   help="reuse a split written by the split subcommand")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="trajacast",
        description="Trajectory-similarity forecasting for 15-minute flow series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    def new(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None,
                       help="key = value file; flags given explicitly win")
        registry[name] = p
        return p

    p = new("synth", "generate a synthetic series")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--length", type=int, required=True, help="number of slots")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", type=_parse_when, default=datetime(2024, 1, 1))
    p.add_argument("--amplitude", type=float, default=300.0)
    p.add_argument("--noise-sd", type=float, default=20.0)
    p.add_argument("--offset", type=float, default=None)
    p.add_argument("--period", type=int, default=96)
    p.add_argument("--coeffs", type=_comma_floats, default=[0.5],
                   help="AR coefficients, comma separated")
    p.add_argument("--x0", type=_comma_floats, default=[8.0],
                   help="AR initial values")
    p.add_argument("--ar-intercept", type=float, default=0.0)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = new("ingest", "parse, aggregate and impute a raw 5-minute CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--ts-col", default="timestamp")
    p.add_argument("--flow-col", default="flow")
    p.add_argument("--ts-format", default=None,
                   help="strptime format; default tries common layouts")
    p.add_argument("-o", "--out", required=True, help="clean series CSV")
    p.add_argument("--report", default=None, help="write the report here too")
    p.set_defaults(func=cmd_ingest)

    p = new("split", "compute a tune/test split from dates")
    p.add_argument("--series", required=True)
    _add_split_flags(p)
    p.add_argument("-o", "--out", default=None, help="write the split JSON here")
    p.set_defaults(func=cmd_split)

    p = new("tune", "grid search; leaderboard ranked by the tune metric")
    p.add_argument("--series", required=True)
    _add_split_flags(p)
    p.add_argument("--models", type=_comma_list, default=["mean"],
                   help="grid models, e.g. mean,m1,m2,st")
    p.add_argument("--distances", type=_comma_list, default=["weuclidean"])
    p.add_argument("--lengths", type=_comma_ints,
                   default=list(range(2, 21)), help="trajectory lengths")
    p.add_argument("--ks", type=_comma_ints,
                   default=[5, 10, 15, 20, 25, 30, 40, 50, 60, 80, 100, 125,
                            150, 175, 200],
                   help="neighbour counts")
    p.add_argument("--radii", type=_comma_radii, default=[None],
                   help="seasonal radii; 'none' disables the filter")
    p.add_argument("--outliers", type=_comma_list, default=["none"])
    p.add_argument("--weights", type=_comma_list, default=None,
                   help="weight functions for m1/m2 (default: all)")
    p.add_argument("--objective", choices=("mae", "mape", "winkler"),
                   default="mae")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--folds", type=int, default=1,
                   help="day-block CV folds (1 = plain tune metric)")
    p.add_argument("--hourly", action="store_true",
                   help="tune a per-hour bank; --out becomes a directory")
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel workers (default $TRAJACAST_JOBS or 1)")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_tune)

    p = new("run", "forecast a split and write report CSVs")
    p.add_argument("--series", required=True)
    _add_split_flags(p)
    p.add_argument("--models", type=_comma_list, default=["mean"],
                   help="point models and benchmarks, comma separated")
    p.add_argument("--intervals", type=_comma_list, default=["none"],
                   help=f"interval methods from {', '.join(INTERVAL_METHODS)}")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--distance", default="weuclidean")
    p.add_argument("--k", type=int, default=25, help="neighbour count")
    p.add_argument("--radius", type=int, default=None,
                   help="seasonal slot radius for similarity models")
    p.add_argument("--outlier", default="none")
    p.add_argument("--bank", default=None,
                   help="bank.json for the 'hourly' model")
    p.add_argument("--hs-window", type=int, default=60)
    p.add_argument("--mdst-length", type=int, default=8)
    p.add_argument("--mdst-k", type=int, default=220)
    p.add_argument("--mdst-radius", type=int, default=6)
    p.add_argument("--ar-no-intercept", action="store_true",
                   help="fit AR benchmarks without an intercept")
    p.add_argument("--dm", action="store_true",
                   help="write the pairwise equal-accuracy p-value matrix")
    p.add_argument("--hourly", action="store_true",
                   help="write per-hour metric breakdowns")
    p.add_argument("--loss", choices=("abs", "squared"), default="abs")
    p.add_argument("--seed", type=int, default=0,
                   help="recorded for reproducibility; the run itself is "
                        "deterministic")
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel workers (default $TRAJACAST_JOBS or 1)")
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_run)

    p = new("compare", "equal-accuracy tests between saved forecast files")
    p.add_argument("--forecasts", nargs="+", required=True)
    p.add_argument("--loss", choices=("abs", "squared"), default="abs")
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_compare)

    return parser, registry


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            overrides = read_config(args.config)
            _apply_config(registry[args.command], overrides)
        except (OSError, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
        args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"{args.command} error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
