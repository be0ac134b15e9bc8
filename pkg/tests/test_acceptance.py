"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s``. The benchmark-shaped
datasets are synthetic stand-ins with the reference benchmark shapes (the real sources
need pinned URLs in the manifest); every identity checked here is
shape-independent.
"""

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from conformal_ts.conformal import (
    SplitSpec,
    ThresholdMode,
    build_interval,
    rolling_calibrate,
    uncertainty_threshold,
)
from conformal_ts.datasets import synth_iid, synth_seasonal, write_long_csv
from conformal_ts.domain import ConformityScores, Frequency
from conformal_ts.forecasters import ForecasterHandle, naive_forecast
from conformal_ts.harness import (
    DatasetSource,
    EstimatorSpec,
    ExperimentConfig,
    ScenarioSpec,
    run_experiment,
    run_experiment_detailed,
)
from conformal_ts.metrics import (
    EvaluationRecord,
    coverage_rate,
    interval_width,
    mase,
    msiw,
)

ECHO_ENDPOINT = [sys.executable, "-m", "conformal_ts.echo_adapter"]


def _criterion(name):
    """Print one pass/fail line per criterion around the assertion body."""

    class _Reporter:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            print(f"[{'FAIL' if exc_type else 'PASS'}] {name}")
            return False

    return _Reporter()


# --- 1. quantile-oracle equivalence -------------------------------------------


def _oracle(values: list[float], alpha: float) -> float:
    """Smallest score s with #{scores <= s} >= ceil((n+1)(1-alpha))."""
    n = len(values)
    k = math.ceil(Fraction(n + 1) * (1 - Fraction(str(alpha))))
    if k > n:
        return max(values)
    covered = 0
    for value in sorted(set(values)):
        covered += sum(1 for v in values if v == value)
        if covered >= k:
            return value
    return max(values)


def test_quantile_oracle_equivalence():
    with _criterion("quantile-oracle equivalence (1000 sets x 3 alphas, < 5 s)"):
        rng = np.random.default_rng(20240613)
        started = time.monotonic()
        for case in range(1000):
            n = int(rng.integers(1, 51))
            # coarse integer grid forces duplicated score values
            values = (rng.integers(0, max(2, n), size=n) / 2.0).tolist()
            scores = ConformityScores(scores=np.array(values))
            for alpha in (0.05, 0.1, 0.2):
                got = uncertainty_threshold(scores, alpha).q_hat
                assert got == _oracle(values, alpha), (case, n, alpha)
        elapsed = time.monotonic() - started
        assert elapsed < 5.0, f"oracle sweep took {elapsed:.2f} s"


# --- 2. exchangeable coverage ------------------------------------------------------


def test_exchangeable_coverage():
    with _criterion("exchangeable coverage on i.i.d. data in [0.87, 0.94] (< 60 s)"):
        started = time.monotonic()
        context, horizon, alpha, n_cal = 64, 8, 0.1, 200
        rates = []
        for i in range(500):
            series = synth_iid(
                context + n_cal + horizon, mean=3.0, sigma=1.0, seed=1000 + i
            )
            available = series.slice(0, context + n_cal)
            holdout = series.values[context + n_cal :]
            scores = rolling_calibrate(available, naive_forecast, context, horizon)
            threshold = uncertainty_threshold(scores, alpha)
            interval = build_interval(
                naive_forecast(available.values, horizon), threshold
            )
            rates.append(coverage_rate(holdout, interval))
        mean_coverage = float(np.mean(rates))
        elapsed = time.monotonic() - started
        assert 0.87 <= mean_coverage <= 0.94, f"mean coverage {mean_coverage:.4f}"
        assert elapsed < 60.0, f"coverage sweep took {elapsed:.2f} s"


# --- 3. rolling-window bookkeeping ----------------------------------------------------


def test_rolling_window_bookkeeping():
    with _criterion("rolling-window bookkeeping: 8248 and 1720 calibration scores"):
        long_series = synth_iid(8760, mean=10.0, sigma=2.0, seed=7)
        for horizon in (24, 72, 168):
            scores = rolling_calibrate(long_series, naive_forecast, 512, horizon)
            assert len(scores) == 8248, (horizon, len(scores))
        short_series = synth_iid(2232, mean=10.0, sigma=2.0, seed=8)
        for horizon in (24, 72, 168):
            scores = rolling_calibrate(short_series, naive_forecast, 512, horizon)
            assert len(scores) == 1720, (horizon, len(scores))


# --- 4 & 5. benchmark-shaped runs -------------------------------------------------------


@pytest.fixture(scope="module")
def benchmark_runs(tmp_path_factory):
    """Naive runs over synthetic datasets with the reference benchmark shapes."""
    root = tmp_path_factory.mktemp("bench")
    estimators = (
        EstimatorSpec(handle=ForecasterHandle(name="naive", kind="naive")),
        # same forecasts through the independent seasonal read-off route
        EstimatorSpec(
            handle=ForecasterHandle(
                name="naive_via_seasonal",
                kind="seasonal_naive",
                params={"season_length": 1},
            )
        ),
    )

    def windowed(points):
        return tuple(
            ScenarioSpec(horizon_label=label, window_points=points, n_windows=20)
            for label in ("S", "M", "L")
        )

    per_series = tuple(
        ScenarioSpec(horizon_label=label, per_series=True) for label in ("S", "M", "L")
    )

    datasets = {}

    ercot = synth_seasonal(
        17520, 24, amplitude=30.0, noise=5.0, seed=1, mean=100.0,
        series_id="load", frequency=Frequency.HOURLY,
    )
    path = root / "ercot.csv"
    write_long_csv(path, [ercot])
    datasets["ercot-8760"] = (path, windowed(8760))
    datasets["ercot-2232"] = (path, windowed(2232))

    shapes = {
        "nn5_daily": (100, 791, Frequency.DAILY, 7),
        "nn5_weekly": (100, 105, Frequency.WEEKLY, 4),
        "m3_monthly": (1428, 66, Frequency.MONTHLY, 12),
    }
    for name, (count, length, freq, m) in shapes.items():
        series = [
            synth_seasonal(
                length, m, amplitude=8.0, noise=2.0, seed=100 + i, mean=50.0,
                series_id=f"{name}-{i:04d}", frequency=freq,
            )
            for i in range(count)
        ]
        path = root / f"{name}.csv"
        write_long_csv(path, series)
        datasets[name] = (path, per_series)

    results = {}
    for label, (path, scenarios) in datasets.items():
        config = ExperimentConfig(
            dataset=DatasetSource(name=label, path=str(path)),
            scenarios=scenarios,
            estimators=estimators,
            parallelism=1,
        )
        results[label] = run_experiment_detailed(config)
    return results


def test_naive_scaling_identities(benchmark_runs):
    with _criterion("naive MASE = MSIW = 1.000 within 1e-12 on all 15 cells"):
        checked = 0
        for label, result in benchmark_runs.items():
            for row in result.rows:
                assert row.failures == 0, (label, row)
                assert abs(row.mase - 1.0) <= 1e-12, (label, row)
                assert abs(row.msiw - 1.0) <= 1e-12, (label, row)
                checked += 1
        # 5 dataset settings x 3 horizons x 2 naive routes
        assert checked == 30


def test_unit_counts_match_reference_settings(benchmark_runs):
    with _criterion("unit bookkeeping: 20 windows / 100 series / 1428 series"):
        expected = {
            "ercot-8760": 20,
            "ercot-2232": 20,
            "nn5_daily": 100,
            "nn5_weekly": 100,
            "m3_monthly": 1428,
        }
        for label, result in benchmark_runs.items():
            for row in result.rows:
                assert row.n_units == expected[label], (label, row)


def test_interval_geometry(benchmark_runs):
    with _criterion("interval geometry: width = 2*q_hat, center inside band"):
        checked = 0
        for result in benchmark_runs.values():
            for outcome in result.outcomes:
                assert outcome.error is None
                width = interval_width(outcome.interval)
                q = outcome.threshold.q_hat
                assert abs(width - 2.0 * q) <= 1e-12 * max(1.0, 2.0 * q)
                assert np.all(outcome.interval.lower <= outcome.interval.center.point)
                assert np.all(outcome.interval.center.point <= outcome.interval.upper)
                checked += 1
        # 2 ercot settings x 3 horizons x 2 routes x 20 windows, plus
        # 2 routes x 3 horizons over (100 + 100 + 1428) series
        assert checked == 2 * 3 * 2 * 20 + 2 * 3 * (100 + 100 + 1428)


# --- 6. echo-adapter equivalence --------------------------------------------------------


def test_echo_adapter_equivalence(tmp_path):
    with _criterion("echo-adapter run bitwise-identical to built-in naive"):
        series = [
            synth_seasonal(
                240, 24, amplitude=5.0, noise=1.0, seed=40 + i, mean=20.0,
                series_id=f"s{i}",
            )
            for i in range(3)
        ]
        path = tmp_path / "echo.csv"
        write_long_csv(path, series)

        def config(handle):
            return ExperimentConfig(
                dataset=DatasetSource(name="echo-check", path=str(path)),
                scenarios=(
                    ScenarioSpec(horizon_label="S", horizon_steps=24, per_series=True),
                ),
                estimators=(
                    EstimatorSpec(handle=handle, split=SplitSpec.context(32)),
                ),
                parallelism=1,
            )

        builtin = run_experiment(
            config(ForecasterHandle(name="m", kind="naive"))
        )
        bridged = run_experiment(
            config(
                ForecasterHandle(
                    name="m", kind="external", params={"endpoint": ECHO_ENDPOINT}
                )
            )
        )
        assert builtin == bridged


# --- 7. local/global collapse --------------------------------------------------------------


def test_local_global_collapse_single_series(tmp_path):
    with _criterion("local/global thresholds identical on a single-series dataset"):
        series = synth_seasonal(
            600, 24, amplitude=10.0, noise=2.0, seed=77, mean=40.0, series_id="solo"
        )
        path = tmp_path / "solo.csv"
        write_long_csv(path, [series])

        def run(mode):
            return run_experiment_detailed(
                ExperimentConfig(
                    dataset=DatasetSource(name="solo", path=str(path)),
                    scenarios=(
                        ScenarioSpec(
                            horizon_label="S", horizon_steps=24, per_series=True
                        ),
                    ),
                    estimators=(
                        EstimatorSpec(
                            handle=ForecasterHandle(name="naive", kind="naive")
                        ),
                        EstimatorSpec(
                            handle=ForecasterHandle(
                                name="seasonal", kind="seasonal_naive"
                            )
                        ),
                    ),
                    threshold_mode=mode,
                    parallelism=1,
                )
            )

        local = run(ThresholdMode.LOCAL)
        pooled = run(ThresholdMode.GLOBAL)
        assert local.rows == pooled.rows
        for lo, go in zip(local.outcomes, pooled.outcomes):
            assert lo.threshold == go.threshold


# --- 8. aggregation asymmetry -----------------------------------------------------------------


def test_aggregation_asymmetry_hand_case():
    with _criterion("MASE = 31/22 and MSIW = 1.0 on the two-unit hand case"):
        model = [
            EvaluationRecord(unit_id="a", cr=1.0, iw=1.0, mae=1.0),
            EvaluationRecord(unit_id="b", cr=1.0, iw=3.0, mae=30.0),
        ]
        naive = [
            EvaluationRecord(unit_id="a", cr=1.0, iw=2.0, mae=2.0),
            EvaluationRecord(unit_id="b", cr=1.0, iw=2.0, mae=20.0),
        ]
        assert mase(model, naive) == 31 / 22
        assert msiw(model, naive) == 1.0
