"""Experiment orchestration: determinism, baselines, failures, reports."""

import dataclasses
import json
import math
import sys

import numpy as np
import pytest

from conformal_ts.cli import main as cli_main
from conformal_ts.conformal import SplitSpec, ThresholdMode
from conformal_ts.datasets import synth_iid, synth_seasonal, write_long_csv
from conformal_ts.domain import Frequency, MiscoverageRate
from conformal_ts.errors import ConfigError
from conformal_ts.forecasters import ForecasterHandle
from conformal_ts.harness import (
    DatasetSource,
    EstimatorSpec,
    ExperimentConfig,
    ScenarioSpec,
    default_external_context,
    emit_report,
    load_config,
    plot_series,
    run_experiment,
    run_experiment_detailed,
)

ECHO_ENDPOINT = [sys.executable, "-m", "conformal_ts.echo_adapter"]


def _write_dataset(tmp_path, n_series=3, length=300, seed0=0):
    series = [
        synth_seasonal(
            length, 24, amplitude=5.0, noise=0.5, seed=seed0 + i, mean=20.0,
            series_id=f"s{i:02d}",
        )
        for i in range(n_series)
    ]
    path = tmp_path / "data.csv"
    write_long_csv(path, series)
    return path


def _config(path, estimators, scenarios=None, **kw):
    return ExperimentConfig(
        dataset=DatasetSource(name="demo", path=str(path)),
        scenarios=tuple(
            scenarios
            or [ScenarioSpec(horizon_label="S", horizon_steps=24, per_series=True)]
        ),
        estimators=tuple(estimators),
        **kw,
    )


def _naive():
    return EstimatorSpec(handle=ForecasterHandle(name="naive", kind="naive"))


def _seasonal():
    return EstimatorSpec(handle=ForecasterHandle(name="seasonal_naive", kind="seasonal_naive"))


def test_naive_row_is_identity(tmp_path):
    rows = run_experiment(_config(_write_dataset(tmp_path), [_naive(), _seasonal()]))
    naive_row = rows[0]
    assert naive_row.estimator == "naive"
    assert naive_row.mase == 1.0
    assert naive_row.msiw == 1.0
    assert naive_row.failures == 0


def test_rerun_is_bit_identical(tmp_path):
    config = _config(_write_dataset(tmp_path), [_naive(), _seasonal()])
    assert run_experiment(config) == run_experiment(config)


def test_unit_accounting(tmp_path):
    config = _config(_write_dataset(tmp_path, n_series=4), [_naive(), _seasonal()])
    result = run_experiment_detailed(config)
    for row in result.rows:
        assert row.n_units + row.failures == 4


def test_window_scenario_units(tmp_path):
    series = synth_iid(2000, mean=10.0, sigma=1.0, seed=1, series_id="one")
    path = tmp_path / "one.csv"
    write_long_csv(path, [series])
    config = _config(
        path,
        [_naive()],
        scenarios=[
            ScenarioSpec(
                horizon_label="S", horizon_steps=24, window_points=800, n_windows=6
            )
        ],
    )
    result = run_experiment_detailed(config)
    (row,) = result.rows
    assert row.dataset == "demo-800"
    assert row.n_units == 6
    unit_ids = {o.unit_id for o in result.outcomes}
    assert len(unit_ids) == 6


def test_window_scenarios_need_single_series(tmp_path):
    config = _config(
        _write_dataset(tmp_path, n_series=2),
        [_naive()],
        scenarios=[
            ScenarioSpec(horizon_label="S", horizon_steps=24, window_points=100)
        ],
    )
    with pytest.raises(ConfigError):
        run_experiment(config)


def test_local_and_global_collapse_on_single_unit(tmp_path):
    series = synth_iid(400, mean=5.0, sigma=1.0, seed=7, series_id="solo")
    path = tmp_path / "solo.csv"
    write_long_csv(path, [series])
    base = _config(path, [_naive(), _seasonal()])
    local = run_experiment_detailed(
        dataclasses.replace(base, threshold_mode=ThresholdMode.LOCAL)
    )
    global_ = run_experiment_detailed(
        dataclasses.replace(base, threshold_mode=ThresholdMode.GLOBAL)
    )
    assert local.rows == global_.rows
    for lo, go in zip(local.outcomes, global_.outcomes):
        assert lo.threshold == go.threshold


def test_echo_adapter_matches_naive_rows(tmp_path):
    path = _write_dataset(tmp_path, n_series=2, length=200)
    naive_cfg = _config(
        path,
        [EstimatorSpec(handle=ForecasterHandle(name="m", kind="naive"),
                       split=SplitSpec.context(32))],
    )
    echo_cfg = _config(
        path,
        [
            EstimatorSpec(
                handle=ForecasterHandle(
                    name="m", kind="external", params={"endpoint": ECHO_ENDPOINT}
                ),
                split=SplitSpec.context(32),
            )
        ],
    )
    assert run_experiment(naive_cfg) == run_experiment(echo_cfg)


def test_external_failure_is_counted_not_dropped(tmp_path):
    path = _write_dataset(tmp_path, n_series=3, length=120)
    config = _config(
        path,
        [
            _naive(),
            EstimatorSpec(
                handle=ForecasterHandle(
                    name="dead",
                    kind="external",
                    params={"endpoint": "127.0.0.1:1"},
                )
            ),
        ],
    )
    rows = run_experiment(config)
    dead = rows[1]
    assert dead.estimator == "dead"
    assert dead.n_units == 0
    assert dead.failures == 3
    assert math.isnan(dead.mase)


def test_degenerate_naive_unit_fails_loudly(tmp_path):
    # one constant series gives naive a zero-width interval; that unit is
    # counted as a failure instead of poisoning the width ratios
    from conformal_ts.domain import TimeSeries
    from datetime import datetime

    constant = TimeSeries(
        id="flat", start=datetime(2020, 1, 1), frequency=Frequency.HOURLY,
        values=np.full(200, 5.0),
    )
    noisy = synth_iid(200, mean=5.0, sigma=1.0, seed=3, series_id="noisy")
    path = tmp_path / "mix.csv"
    write_long_csv(path, [constant, noisy])
    rows = run_experiment(_config(path, [_naive(), _seasonal()]))
    for row in rows:
        assert row.n_units == 1
        assert row.failures == 1
        assert np.isfinite(row.msiw)


def test_ensemble_estimator_runs(tmp_path):
    path = _write_dataset(tmp_path, n_series=2, length=260)
    config = _config(
        path,
        [
            _naive(),
            EstimatorSpec(
                handle=ForecasterHandle(name="ensemble", kind="stat_ensemble_light")
            ),
        ],
    )
    rows = run_experiment(config)
    ens = rows[1]
    assert ens.failures == 0
    assert ens.n_units == 2
    assert np.isfinite(ens.mase)
    # seasonal data: the seasonal-aware ensemble beats a flat naive forecast
    assert ens.mase < 1.0


def test_parallel_run_matches_serial(tmp_path):
    path = _write_dataset(tmp_path, n_series=4, length=200)
    serial = _config(path, [_naive(), _seasonal()], parallelism=1)
    parallel = _config(path, [_naive(), _seasonal()], parallelism=4)
    assert run_experiment(serial) == run_experiment(parallel)


def test_default_external_context_rules():
    assert default_external_context("ercot", 8760, 24) == 512
    assert default_external_context("nn5_daily", 784, 7) == 128
    assert default_external_context("nn5_weekly", 101, 4) == 64
    assert default_external_context("m3_monthly", 63, 3) == 32
    # generic rule: plenty of data
    assert default_external_context("other", 5000, 24) == 512
    # constrained: multiple of 32, within ten horizons and 40% of data
    assert default_external_context("other", 700, 21) == 192
    assert default_external_context("other", 90, 4) == 32


def test_run_seed_override_changes_random_windows(tmp_path):
    series = synth_iid(3000, mean=0.0, sigma=1.0, seed=5, series_id="one")
    path = tmp_path / "one.csv"
    write_long_csv(path, [series])

    def cfg(seed):
        return _config(
            path,
            [_naive()],
            scenarios=[
                ScenarioSpec(
                    horizon_label="S",
                    horizon_steps=24,
                    window_points=500,
                    n_windows=4,
                    seed=seed,
                    placement="random",
                )
            ],
        )

    assert run_experiment(cfg(1)) != run_experiment(cfg(2))
    assert run_experiment(cfg(1)) == run_experiment(cfg(1))


# --- config file + CLI -----------------------------------------------------------


def _config_file(tmp_path, data_path, **overrides):
    config = {
        "dataset": {"name": "demo", "path": str(data_path)},
        "scenarios": [{"horizon": {"label": "S", "steps": 24}, "per_series": True}],
        "estimators": [
            {"name": "naive", "kind": "naive"},
            {"name": "seasonal_naive", "kind": "seasonal_naive"},
        ],
        "alpha": 0.1,
        "threshold_mode": "local",
        "output_dir": str(tmp_path / "out"),
    }
    config.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def test_load_config_mirrors_fields(tmp_path):
    data = _write_dataset(tmp_path)
    config = load_config(_config_file(tmp_path, data, alpha=0.2, threshold_mode="global"))
    assert config.alpha == MiscoverageRate(0.2)
    assert config.threshold_mode is ThresholdMode.GLOBAL
    assert [e.handle.name for e in config.estimators] == ["naive", "seasonal_naive"]


def test_config_rejects_duplicate_names(tmp_path):
    data = _write_dataset(tmp_path)
    path = _config_file(
        tmp_path,
        data,
        estimators=[{"name": "x", "kind": "naive"}, {"name": "x", "kind": "naive"}],
    )
    with pytest.raises(ConfigError):
        load_config(path)


def test_cli_run_and_plot(tmp_path, capsys):
    data = _write_dataset(tmp_path, n_series=2, length=200)
    config = _config_file(tmp_path, data)
    assert cli_main(["run", "--config", str(config)]) == 0
    out_dir = tmp_path / "out"
    assert (out_dir / "results.csv").exists()
    assert (out_dir / "results.json").exists()
    assert (out_dir / "report.md").exists()
    charts = list(out_dir.glob("chart_*.svg"))
    assert len(charts) == 1

    capsys.readouterr()
    assert (
        cli_main(
            ["plot", "--results", str(out_dir / "results.json"), "--out", str(tmp_path / "replot")]
        )
        == 0
    )
    assert (tmp_path / "replot" / "report.md").read_text() == (
        out_dir / "report.md"
    ).read_text()


def test_cli_adapters_check(capsys):
    endpoint = " ".join(ECHO_ENDPOINT)
    assert cli_main(["adapters", "check", "--endpoint", endpoint]) == 0
    assert "echo" in capsys.readouterr().out


def test_cli_alpha_and_threshold_overrides(tmp_path):
    data = _write_dataset(tmp_path, n_series=2, length=200)
    config = _config_file(tmp_path, data)
    out = tmp_path / "out2"
    assert (
        cli_main(
            ["run", "--config", str(config), "--alpha", "0.2", "--threshold", "global",
             "--out", str(out)]
        )
        == 0
    )
    payload = json.loads((out / "results.json").read_text())
    assert payload["alpha"] == 0.2


def test_emit_report_is_byte_identical(tmp_path):
    data = _write_dataset(tmp_path, n_series=2, length=200)
    rows = run_experiment(_config(data, [_naive(), _seasonal()]))
    first = emit_report(rows, tmp_path / "a", alpha=0.1)
    second = emit_report(rows, tmp_path / "b", alpha=0.1)
    for fa, fb in zip(first, second):
        assert fa.read_bytes() == fb.read_bytes()
    # and re-emitting into the same directory leaves identical bytes
    third = emit_report(rows, tmp_path / "a", alpha=0.1)
    for fa, fc in zip(first, third):
        assert fa.read_bytes() == fc.read_bytes()


def test_plot_series_variants(tmp_path):
    from conformal_ts.conformal import build_interval, uncertainty_threshold
    from conformal_ts.domain import ConformityScores, Forecast

    series = synth_seasonal(120, 12, amplitude=3.0, noise=0.3, seed=2, mean=10.0)
    center = Forecast(point=np.full(12, 10.0))
    threshold = uncertainty_threshold(
        ConformityScores(scores=np.linspace(0.1, 3.0, 50)), 0.1
    )
    interval = build_interval(center, threshold)
    actuals = 10.0 + np.linspace(-5.0, 5.0, 12)

    out = plot_series(series, interval, actuals, tmp_path / "plot.svg")
    text = out.read_text()
    assert "<svg" in text and "polygon" in text
    assert "#d62728" in text  # at least one point falls outside the band

    zero = build_interval(
        center,
        uncertainty_threshold(ConformityScores(scores=np.zeros(50)), 0.1),
    )
    collapsed = plot_series(series, zero, np.full(12, 10.0), tmp_path / "zero.svg")
    assert "#d62728" not in collapsed.read_text()

    empty = plot_series(series, None, np.array([]), tmp_path / "empty.svg")
    text = empty.read_text()
    assert "<svg" in text and "polygon" not in text
