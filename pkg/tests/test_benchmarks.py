"""Benchmark forecasters: naive, seasonal naive, and autoregression."""

from __future__ import annotations

import numpy as np
import pytest

from trajacast.benchmarks import (
    ARForecaster,
    NaiveForecaster,
    SeasonalNaiveForecaster,
    ar_forecast,
    fit_ar,
    naive_forecast,
    parse_benchmark,
    seasonal_naive_forecast,
)
from trajacast.dataset import split_from_indices
from trajacast.metrics import point_metrics
from trajacast.synthdata import SynthSpec, generate


class TestPrimitives:
    def test_naive_is_previous_value(self):
        values = np.array([10.0, 20.0, 30.0])
        assert naive_forecast(values, 2) == 10.0
        assert naive_forecast(values, 3) == 20.0

    def test_naive_needs_a_past(self):
        with pytest.raises(ValueError):
            naive_forecast(np.array([1.0, 2.0]), 1)

    def test_seasonal_naive_single_period(self):
        values = np.arange(1.0, 11.0)
        assert seasonal_naive_forecast(values, 8, period=3, depth=1) == 5.0

    def test_seasonal_naive_depth_averages_available_donors(self):
        values = np.arange(1.0, 11.0)
        # t=8, period=3, depth=3: donors at 5, 2 (t-9 < 1 is dropped).
        got = seasonal_naive_forecast(values, 8, period=3, depth=3)
        assert got == pytest.approx((values[4] + values[1]) / 2)

    def test_seasonal_naive_needs_full_period(self):
        with pytest.raises(ValueError):
            seasonal_naive_forecast(np.arange(10.0), 3, period=3)

    def test_ar_forecast_iterates_by_hand(self):
        coef = np.array([0.5, 0.25, 1.0])  # two lags plus intercept
        history = np.array([2.0, 4.0])
        one = 1.0 + 0.5 * 4.0 + 0.25 * 2.0
        assert ar_forecast(history, coef, 2, steps=1) == pytest.approx(one)
        two = 1.0 + 0.5 * one + 0.25 * 4.0
        assert ar_forecast(history, coef, 2, steps=2) == pytest.approx(two)

    def test_ar_forecast_without_intercept(self):
        coef = np.array([0.9])
        assert ar_forecast(np.array([10.0]), coef, 1, intercept=False) == \
            pytest.approx(9.0)


class TestFitAr:
    def test_recovers_coefficients_without_noise(self):
        rng = np.random.default_rng(55)
        true = np.array([0.6, -0.3])
        values = list(rng.uniform(1, 2, size=2))
        for _ in range(300):
            values.append(
                5.0 + true[0] * values[-1] + true[1] * values[-2]
            )
        coef = fit_ar(np.asarray(values), 2)
        np.testing.assert_allclose(coef[:2], true, atol=1e-6)
        assert coef[2] == pytest.approx(5.0, abs=1e-4)

    def test_recovers_coefficients_with_small_noise(self):
        rng = np.random.default_rng(56)
        true = np.array([0.5, 0.2])
        values = [10.0, 10.0]
        for _ in range(5000):
            values.append(
                3.0 + true[0] * values[-1] + true[1] * values[-2]
                + rng.normal(scale=0.05)
            )
        coef = fit_ar(np.asarray(values), 2)
        np.testing.assert_allclose(coef[:2], true, atol=2e-2)

    def test_no_intercept_design(self):
        rng = np.random.default_rng(57)
        values = [1.0]
        for _ in range(200):
            values.append(0.8 * values[-1] + rng.normal(scale=1e-9))
        coef = fit_ar(np.asarray(values), 1, intercept=False)
        assert coef.size == 1
        assert coef[0] == pytest.approx(0.8, abs=1e-6)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            fit_ar(np.arange(3.0), 2)


@pytest.fixture(scope="module")
def series():
    return generate(SynthSpec(kind="daily-sinusoid", length=96 * 30, seed=3))


@pytest.fixture(scope="module")
def split():
    last = 96 * 30 - 14
    s = 96 * 20
    u = s - (last - s + 1)
    return split_from_indices(u=u, s=s, last=last, length=14)


class TestNaiveForecaster:
    def test_predictions_are_shifted_actuals(self, series, split):
        fc = NaiveForecaster().fit(series, split)
        preds = fc.predict("test")
        targets = split.targets("test")
        values = np.asarray(series.values)
        np.testing.assert_array_equal(preds, values[targets - 2])

    def test_mae_equals_mean_first_difference(self, series, split):
        fc = NaiveForecaster().fit(series, split)
        ev = point_metrics(fc.predict("test"), fc.actuals("test"))
        targets = split.targets("test")
        values = np.asarray(series.values)
        want = np.abs(np.diff(values))[targets - 2].mean()
        assert ev.mae == pytest.approx(want, rel=1e-12)

    def test_multistep_uses_origin_not_previous_slot(self, series):
        last = 96 * 30 - 18
        s = 96 * 20
        u = s - (last - s + 1)
        split5 = split_from_indices(u=u, s=s, last=last, length=14, step=5)
        fc = NaiveForecaster().fit(series, split5)
        preds = fc.predict("test")
        targets = split5.targets("test")
        values = np.asarray(series.values)
        # Forecast for target t is the value at its origin t - 5.
        np.testing.assert_array_equal(preds, values[targets - 6])


class TestSeasonalNaiveForecaster:
    def test_depth_one_copies_previous_day(self, series, split):
        fc = SeasonalNaiveForecaster(period=96, depth=1).fit(series, split)
        preds = fc.predict("test")
        targets = split.targets("test")
        values = np.asarray(series.values)
        np.testing.assert_array_equal(preds, values[targets - 97])

    def test_depth_three_averages_three_days(self, series, split):
        fc = SeasonalNaiveForecaster(period=96, depth=3).fit(series, split)
        preds = fc.predict("test")
        targets = split.targets("test")
        values = np.asarray(series.values)
        want = (
            values[targets - 97] + values[targets - 193] + values[targets - 289]
        ) / 3
        np.testing.assert_allclose(preds, want, rtol=1e-12)

    def test_beats_naive_on_daily_pattern(self, series, split):
        naive = NaiveForecaster().fit(series, split)
        snaive = SeasonalNaiveForecaster(period=96, depth=3).fit(series, split)
        mae_naive = point_metrics(naive.predict("test"), naive.actuals("test")).mae
        mae_snaive = point_metrics(snaive.predict("test"), snaive.actuals("test")).mae
        assert mae_snaive < mae_naive


class TestARForecaster:
    def test_fit_window_excludes_test_data(self, series, split):
        fc = ARForecaster(order=9).fit(series, split)
        # Corrupt every value from the first test target onward: the
        # coefficients must be unchanged (the fit never saw them).
        values = np.asarray(series.values).copy()
        first_test_target = split.targets("test")[0]
        values[first_test_target - 1 :] = 9999.0
        from trajacast import TimeSeries

        corrupted = TimeSeries(series.start, values)
        fc2 = ARForecaster(order=9).fit(corrupted, split)
        np.testing.assert_allclose(fc2.coef_, fc.coef_, rtol=1e-12)

    def test_rolling_origin_feeds_latest_data(self, series, split):
        fc = ARForecaster(order=3).fit(series, split)
        q = int(split.queries("test")[50])
        target = q + split.length + split.step - 1
        values = np.asarray(series.values)
        want = ar_forecast(values[: target - 1], fc.coef_, 3, steps=1)
        assert fc.predict(None, indices=[q])[0] == pytest.approx(want, rel=1e-12)

    def test_tracks_a_true_ar_process(self):
        spec = SynthSpec(
            kind="ar", length=3000, seed=11, coeffs=(0.7, 0.2),
            x0=(50.0, 50.0), ar_intercept=5.0, noise_sd=1.0,
        )
        ar_series = generate(spec)
        last = 3000 - 10
        s = 2000
        u = s - (last - s + 1)
        sp = split_from_indices(u=u, s=s, last=last, length=10)
        fc = ARForecaster(order=2).fit(ar_series, sp)
        ev = point_metrics(fc.predict("test"), fc.actuals("test"))
        # Best achievable MAE is the noise mean absolute value ~0.8.
        assert ev.mae < 1.2

    def test_intercept_flag_changes_model(self, series, split):
        with_b = ARForecaster(order=4, intercept=True).fit(series, split)
        without = ARForecaster(order=4, intercept=False).fit(series, split)
        assert with_b.coef_.size == 5
        assert without.coef_.size == 4
        assert not np.allclose(
            with_b.predict("test"), without.predict("test")
        )


class TestParseBenchmark:
    def test_names(self):
        assert isinstance(parse_benchmark("naive"), NaiveForecaster)
        sn = parse_benchmark("snaive:96:3")
        assert isinstance(sn, SeasonalNaiveForecaster)
        assert (sn.period, sn.depth) == (96, 3)
        ar = parse_benchmark("ar:9", ar_intercept=False)
        assert isinstance(ar, ARForecaster)
        assert ar.order == 9 and not ar.intercept

    def test_unknown(self):
        with pytest.raises(ValueError):
            parse_benchmark("drift")
        with pytest.raises(ValueError):
            parse_benchmark("snaive:96")
