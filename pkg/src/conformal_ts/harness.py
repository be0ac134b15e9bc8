"""Experiment orchestration.

Reads an experiment config, runs (dataset x estimator x horizon x
threshold-mode) cells through the conformal engine, aggregates metrics
against the naive baseline, and emits tables and charts. Every estimator
row is scaled by a naive run on the same units, so the naive row reports
MASE = MSIW = 1 by construction.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import report
from .bridge import AdapterClient
from .conformal import (
    SplitSpec,
    ThresholdMode,
    build_interval,
    global_threshold,
    rolling_calibrate,
    split_train_calibration,
    uncertainty_threshold,
)
from .datasets import (
    BUILTIN_DATASETS,
    WindowScenario,
    fetch_dataset,
    load_long_csv,
    sample_windows,
)
from .domain import (
    ConformityScores,
    Forecast,
    Frequency,
    HorizonSpec,
    MiscoverageRate,
    PredictionInterval,
    TimeSeries,
    UncertaintyThreshold,
)
from .errors import BridgeError, ConfigError, ConformalTsError
from .forecasters import (
    ForecasterHandle,
    naive_forecast,
    seasonal_naive_forecast,
    stat_ensemble_light_forecast,
)
from .metrics import (
    EvaluationRecord,
    coverage_rate,
    interval_width,
    mase,
    mean_absolute_error,
    mean_coverage_rate,
    msiw,
)
from .report import ResultRow

__all__ = [
    "DatasetSource",
    "ScenarioSpec",
    "EstimatorSpec",
    "ExperimentConfig",
    "UnitOutcome",
    "ExperimentResult",
    "load_config",
    "default_external_context",
    "run_experiment",
    "run_experiment_detailed",
    "emit_report",
    "plot_series",
]

# Context lengths replicating the reference per-dataset configuration.
_EXTERNAL_CONTEXT_TABLE = {
    "ercot": 512,
    "nn5_daily": 128,
    "nn5_weekly": 64,
    "m3_monthly": 32,
}

_MAX_WORKERS = 16


@dataclass(frozen=True)
class DatasetSource:
    """Where an experiment's data comes from.

    Either a local long-CSV ``path`` or a manifest entry fetched by name.
    With ``check`` on, the loaded shape is validated against the built-in
    benchmark table when the name matches.
    """

    name: str
    path: str | None = None
    frequency: Frequency | None = None
    check: bool = False
    manifest_path: str | None = None


@dataclass(frozen=True)
class ScenarioSpec:
    """One evaluation cell: a horizon plus how units are formed.

    ``per_series`` holds out the final horizon of every series (units are
    series); otherwise fixed windows are sampled from a single series
    (units are windows).
    """

    horizon_label: str
    horizon_steps: int | None = None
    per_series: bool = False
    window_points: int | None = None
    n_windows: int = 20
    seed: int = 0
    placement: str = "even"

    def __post_init__(self):
        if self.per_series == (self.window_points is not None):
            raise ConfigError(
                "a scenario is either per_series or windowed (window_points)"
            )

    def horizon(self, frequency: Frequency) -> HorizonSpec:
        if self.horizon_steps is not None:
            return HorizonSpec(label=self.horizon_label, steps=self.horizon_steps)
        return HorizonSpec.for_frequency(frequency, self.horizon_label)


@dataclass(frozen=True)
class EstimatorSpec:
    """A forecaster handle plus its train/calibration split policy."""

    handle: ForecasterHandle
    split: SplitSpec | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSource
    scenarios: tuple[ScenarioSpec, ...]
    estimators: tuple[EstimatorSpec, ...]
    alpha: MiscoverageRate = MiscoverageRate(0.1)
    threshold_mode: ThresholdMode = ThresholdMode.LOCAL
    output_dir: str = "results"
    parallelism: int | None = None

    def __post_init__(self):
        names = [e.handle.name for e in self.estimators]
        if len(set(names)) != len(names):
            raise ConfigError("estimator names must be unique within a run")
        if not self.estimators:
            raise ConfigError("at least one estimator is required")
        if not self.scenarios:
            raise ConfigError("at least one scenario is required")
        if self.parallelism is not None and self.parallelism < 1:
            raise ConfigError("parallelism must be positive")


def load_config(path) -> ExperimentConfig:
    """Parse a JSON config whose keys mirror ExperimentConfig field names."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    try:
        ds = raw["dataset"]
        dataset = DatasetSource(
            name=ds["name"],
            path=ds.get("path"),
            frequency=Frequency.from_code(ds["frequency"]) if "frequency" in ds else None,
            check=bool(ds.get("check", False)),
            manifest_path=ds.get("manifest_path"),
        )
        scenarios = []
        for sc in raw["scenarios"]:
            if isinstance(sc, str):
                scenarios.append(ScenarioSpec(horizon_label=sc, per_series=True))
                continue
            horizon = sc.get("horizon", "S")
            if isinstance(horizon, dict):
                label, steps = horizon["label"], horizon.get("steps")
            else:
                label, steps = horizon, sc.get("horizon_steps")
            scenarios.append(
                ScenarioSpec(
                    horizon_label=label,
                    horizon_steps=steps,
                    per_series=bool(sc.get("per_series", False)),
                    window_points=sc.get("window_points"),
                    n_windows=int(sc.get("n_windows", 20)),
                    seed=int(sc.get("seed", 0)),
                    placement=sc.get("placement", "even"),
                )
            )
        estimators = []
        for est in raw["estimators"]:
            handle = ForecasterHandle(
                name=est["name"],
                kind=est["kind"],
                params=dict(est.get("params", {})),
            )
            split = None
            if "split" in est:
                sp = est["split"]
                if "fraction" in sp:
                    split = SplitSpec.fraction(float(sp["fraction"]))
                elif "context" in sp:
                    split = SplitSpec.context(int(sp["context"]))
                else:
                    raise ConfigError(f"estimator {est['name']}: bad split {sp}")
            estimators.append(EstimatorSpec(handle=handle, split=split))
        return ExperimentConfig(
            dataset=dataset,
            scenarios=tuple(scenarios),
            estimators=tuple(estimators),
            alpha=MiscoverageRate(float(raw.get("alpha", 0.1))),
            threshold_mode=ThresholdMode(raw.get("threshold_mode", "local")),
            output_dir=raw.get("output_dir", "results"),
            parallelism=raw.get("parallelism"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc


def default_external_context(dataset_name: str, n_available: int, horizon: int) -> int:
    """Default context length for foundation-model adapters.

    The four benchmark datasets use the reference per-dataset values; other
    datasets get 512 when at least 60% of points stay in calibration, else
    the largest multiple of 32 within ten horizons and 40% of the data,
    floored at 32.
    """
    fixed = _EXTERNAL_CONTEXT_TABLE.get(dataset_name)
    if fixed is not None:
        return fixed
    if 512 <= 0.4 * n_available:
        return 512
    c = min(10 * horizon, int(0.4 * n_available))
    return max(32, (c // 32) * 32)


# --- units -------------------------------------------------------------------


@dataclass(frozen=True)
class EvalUnit:
    unit_id: str
    available: TimeSeries
    holdout: np.ndarray


@dataclass(frozen=True)
class UnitOutcome:
    """Per-unit artifacts of one estimator's SCP pass."""

    dataset: str
    horizon_label: str
    estimator: str
    unit_id: str
    threshold: UncertaintyThreshold | None = None
    interval: PredictionInterval | None = None
    record: EvaluationRecord | None = None
    error: str | None = None


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[ResultRow, ...]
    outcomes: tuple[UnitOutcome, ...]


def _units_for_cell(
    series_list: list[TimeSeries], scenario: ScenarioSpec, horizon: HorizonSpec
) -> list[EvalUnit]:
    if scenario.per_series:
        units = []
        for series in series_list:
            h = horizon.steps
            if len(series) <= h + 1:
                raise ConfigError(
                    f"series {series.id!r} of {len(series)} points cannot hold "
                    f"out a horizon of {h}"
                )
            units.append(
                EvalUnit(
                    unit_id=series.id,
                    available=series.slice(0, len(series) - h),
                    holdout=series.values[len(series) - h :],
                )
            )
        return units
    if len(series_list) != 1:
        raise ConfigError(
            f"window scenarios need a single-series dataset, got {len(series_list)}"
        )
    window = WindowScenario(
        window_points=scenario.window_points,
        horizon=horizon,
        n_windows=scenario.n_windows,
        seed=scenario.seed,
        placement=scenario.placement,
    )
    return [
        EvalUnit(unit_id=w.id, available=w, holdout=holdout)
        for w, holdout in sample_windows(series_list[0], window)
    ]


# --- per-estimator score/forecast pass ----------------------------------------


def _scores_and_center(
    spec: EstimatorSpec,
    unit: EvalUnit,
    horizon: HorizonSpec,
    frequency: Frequency,
    dataset_name: str,
    client: AdapterClient | None,
):
    """Calibration scores over the unit's available data plus the holdout forecast."""
    handle = spec.handle
    h = horizon.steps
    available = unit.available
    values = available.values

    if handle.kind == "naive":
        # default context of one point calibrates on everything else
        c = 1
        if spec.split is not None and spec.split.context_length is not None:
            c = spec.split.context_length
        scores = rolling_calibrate(available, naive_forecast, c, h)
        return scores, naive_forecast(values, h)

    if handle.kind == "seasonal_naive":
        # season follows the prediction horizon in CP runs
        m = int(handle.params.get("season_length", h))
        c = m
        if spec.split is not None and spec.split.context_length is not None:
            c = max(m, spec.split.context_length)
        fn = lambda ctx, hh: seasonal_naive_forecast(ctx, m, hh)
        scores = rolling_calibrate(available, fn, c, h)
        return scores, seasonal_naive_forecast(values, m, h)

    if handle.kind == "stat_ensemble_light":
        m = int(handle.params.get("season_length", frequency.default_season_length))
        split = spec.split or SplitSpec.fraction(0.8)
        train, cal = split_train_calibration(available, split)
        fallback = bool(handle.params.get("short_season_fallback", False))
        full = stat_ensemble_light_forecast(
            train.values, m, len(cal) + h, allow_short_season_fallback=fallback
        )
        residuals = np.abs(full.point[: len(cal)] - cal.values)
        scores = ConformityScores(
            scores=residuals,
            provenance=tuple((unit.unit_id, 0, k) for k in range(len(cal))),
        )
        return scores, Forecast(point=full.point[len(cal) :])

    if handle.kind == "external":
        if client is None:
            raise ConfigError(f"no adapter client for estimator {handle.name!r}")
        if spec.split is not None and spec.split.context_length is not None:
            c = spec.split.context_length
        else:
            c = default_external_context(dataset_name, len(available), h)
        m = int(handle.params.get("season_length", frequency.default_season_length))

        def fn(ctx, hh):
            return client.forecast_values(unit.unit_id, ctx, hh, frequency, m)

        scores = rolling_calibrate(available, fn, c, h)
        center = Forecast(
            point=client.forecast_values(unit.unit_id, values[-c:], h, frequency, m)
        )
        return scores, center

    raise ConfigError(f"unknown forecaster kind {handle.kind!r}")


def _evaluate(
    passes: list,
    units: list[EvalUnit],
    alpha: MiscoverageRate,
    mode: ThresholdMode,
    cell_label: str,
    horizon_label: str,
    estimator: str,
) -> list[UnitOutcome]:
    """Turn per-unit (scores, center) passes into thresholds, intervals, records."""
    outcomes: list[UnitOutcome] = []
    shared: UncertaintyThreshold | None = None
    if mode is ThresholdMode.GLOBAL:
        pooled = {
            unit.unit_id: result[0]
            for unit, result in zip(units, passes)
            if not isinstance(result, Exception)
        }
        if pooled:
            shared = global_threshold(pooled, alpha)

    for unit, result in zip(units, passes):
        base = dict(
            dataset=cell_label,
            horizon_label=horizon_label,
            estimator=estimator,
            unit_id=unit.unit_id,
        )
        if isinstance(result, Exception):
            outcomes.append(UnitOutcome(**base, error=str(result)))
            continue
        scores, center = result
        threshold = shared if shared is not None else uncertainty_threshold(scores, alpha)
        interval = build_interval(center, threshold)
        record = EvaluationRecord(
            unit_id=unit.unit_id,
            cr=coverage_rate(unit.holdout, interval),
            iw=interval_width(interval),
            mae=mean_absolute_error(center.point, unit.holdout),
        )
        outcomes.append(
            UnitOutcome(**base, threshold=threshold, interval=interval, record=record)
        )
    return outcomes


def _run_passes(spec, units, horizon, frequency, dataset_name, client, workers):
    def one(unit: EvalUnit):
        try:
            return _scores_and_center(spec, unit, horizon, frequency, dataset_name, client)
        except ConformalTsError as exc:
            return exc

    if workers > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, units))
    return [one(unit) for unit in units]


def _aggregate_rows(
    estimator_outcomes: list[UnitOutcome],
    baseline_records: dict[str, EvaluationRecord],
    cell_label: str,
    horizon_label: str,
    estimator: str,
) -> ResultRow:
    paired_model: list[EvaluationRecord] = []
    paired_naive: list[EvaluationRecord] = []
    failures = 0
    for outcome in estimator_outcomes:
        naive_rec = baseline_records.get(outcome.unit_id)
        if outcome.record is None or naive_rec is None:
            failures += 1
            continue
        if naive_rec.iw == 0.0:
            # degenerate baseline (constant unit): the width ratio is
            # undefined, so the unit fails loudly instead of poisoning
            # the aggregates
            failures += 1
            continue
        paired_model.append(outcome.record)
        paired_naive.append(naive_rec)
    if paired_model:
        row = ResultRow(
            dataset=cell_label,
            horizon_label=horizon_label,
            estimator=estimator,
            mase=mase(paired_model, paired_naive),
            mcr=mean_coverage_rate(paired_model),
            iw=float(np.mean([r.iw for r in paired_model])),
            msiw=msiw(paired_model, paired_naive),
            n_units=len(paired_model),
            failures=failures,
        )
    else:
        nan = float("nan")
        row = ResultRow(
            dataset=cell_label,
            horizon_label=horizon_label,
            estimator=estimator,
            mase=nan,
            mcr=nan,
            iw=nan,
            msiw=nan,
            n_units=0,
            failures=failures,
        )
    return row


def _resolve_series(config: ExperimentConfig) -> list[TimeSeries]:
    src = config.dataset
    if src.path is not None:
        path = src.path
    else:
        path = fetch_dataset(src.name, manifest_path=src.manifest_path)
    series_list = load_long_csv(path, frequency=src.frequency)
    if src.check and src.name in BUILTIN_DATASETS:
        BUILTIN_DATASETS[src.name].check(series_list)
    return series_list


def run_experiment_detailed(config: ExperimentConfig) -> ExperimentResult:
    """Run every (scenario x estimator) cell and keep per-unit artifacts."""
    series_list = _resolve_series(config)
    frequency = series_list[0].frequency
    rows: list[ResultRow] = []
    outcomes: list[UnitOutcome] = []

    naive_spec = EstimatorSpec(handle=ForecasterHandle(name="__baseline__", kind="naive"))

    for scenario in config.scenarios:
        horizon = scenario.horizon(frequency)
        units = _units_for_cell(series_list, scenario, horizon)
        if scenario.per_series:
            cell_label = config.dataset.name
        else:
            cell_label = f"{config.dataset.name}-{scenario.window_points}"
        workers = config.parallelism or min(len(units), _MAX_WORKERS)

        baseline_passes = _run_passes(
            naive_spec, units, horizon, frequency, config.dataset.name, None, workers
        )
        baseline_outcomes = _evaluate(
            baseline_passes, units, config.alpha, config.threshold_mode,
            cell_label, horizon.label, "__baseline__",
        )
        baseline_records = {
            o.unit_id: o.record for o in baseline_outcomes if o.record is not None
        }

        for spec in config.estimators:
            name = spec.handle.name
            default_naive = spec.handle.kind == "naive" and (
                spec.split is None or spec.split.context_length == 1
            )
            if default_naive:
                est_outcomes = [
                    dataclasses.replace(o, estimator=name) for o in baseline_outcomes
                ]
            elif spec.handle.kind == "external":
                est_outcomes = _run_external(
                    spec, units, horizon, frequency, config, cell_label
                )
            else:
                passes = _run_passes(
                    spec, units, horizon, frequency, config.dataset.name, None, workers
                )
                est_outcomes = _evaluate(
                    passes, units, config.alpha, config.threshold_mode,
                    cell_label, horizon.label, name,
                )
            outcomes.extend(est_outcomes)
            rows.append(
                _aggregate_rows(
                    est_outcomes, baseline_records, cell_label, horizon.label, name
                )
            )

    return ExperimentResult(rows=tuple(rows), outcomes=tuple(outcomes))


def _run_external(spec, units, horizon, frequency, config, cell_label):
    """External estimators go through one adapter connection, serialized."""
    name = spec.handle.name
    endpoint = spec.handle.params["endpoint"]
    timeout_ms = int(spec.handle.params.get("timeout_ms", 120_000))
    try:
        client = AdapterClient(endpoint, timeout_ms=timeout_ms)
    except BridgeError as exc:
        return [
            UnitOutcome(
                dataset=cell_label,
                horizon_label=horizon.label,
                estimator=name,
                unit_id=u.unit_id,
                error=str(exc),
            )
            for u in units
        ]
    try:
        try:
            client.handshake()
        except BridgeError as exc:
            return [
                UnitOutcome(
                    dataset=cell_label,
                    horizon_label=horizon.label,
                    estimator=name,
                    unit_id=u.unit_id,
                    error=str(exc),
                )
                for u in units
            ]
        passes = _run_passes(
            spec, units, horizon, frequency, config.dataset.name, client, 1
        )
        return _evaluate(
            passes, units, config.alpha, config.threshold_mode,
            cell_label, horizon.label, name,
        )
    finally:
        client.close()


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run the experiment and return one row per (scenario, estimator) cell."""
    return list(run_experiment_detailed(config).rows)


# --- emission ------------------------------------------------------------------


def emit_report(
    rows,
    output_dir,
    formats: tuple[str, ...] = ("csv", "json", "md", "svg"),
    alpha: float = 0.1,
) -> list[Path]:
    """Write results tables and per-cell bubble charts; fully deterministic."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    if not rows:
        raise ConfigError("emit_report needs at least one result row")
    written: list[Path] = []

    def emit(name: str, text: str) -> None:
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    if "csv" in formats:
        emit("results.csv", report.render_results_csv(rows))
    if "json" in formats:
        emit("results.json", report.render_results_json(rows, alpha))
    if "md" in formats:
        emit("report.md", report.render_markdown(rows))
    if "svg" in formats:
        cells: dict[tuple[str, str], list[ResultRow]] = {}
        for row in rows:
            cells.setdefault((row.dataset, row.horizon_label), []).append(row)
        for (dataset, label), cell_rows in cells.items():
            safe = dataset.replace("/", "_").replace(" ", "_")
            title = f"{dataset} / horizon {label}"
            emit(
                f"chart_{safe}_{label}.svg",
                report.render_bubble_chart(cell_rows, alpha, title),
            )
    return written


def plot_series(series, interval, actuals, output) -> Path:
    """Render one series with its band and holdout, as an SVG file."""
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.render_series_plot(series, interval, actuals), encoding="utf-8")
    return path
