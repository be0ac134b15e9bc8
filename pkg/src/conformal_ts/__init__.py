"""Split conformal prediction engine and benchmark harness for time series.

Calibrates constant-width prediction intervals around pluggable point
forecasters (built-in baselines natively, external models over a line
protocol) and evaluates them with coverage/width/error metrics scaled
against a naive baseline.
"""

from .conformal import (
    SplitSpec,
    ThresholdMode,
    build_interval,
    conformity_scores,
    corrected_level,
    global_threshold,
    local_thresholds,
    rolling_calibrate,
    split_train_calibration,
    uncertainty_threshold,
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
from .forecasters import (
    ForecasterHandle,
    naive_forecast,
    seasonal_naive_forecast,
    stat_ensemble_light_forecast,
)
from .harness import (
    ExperimentConfig,
    emit_report,
    load_config,
    plot_series,
    run_experiment,
    run_experiment_detailed,
)
from .metrics import (
    AggregateReport,
    EvaluationRecord,
    coverage_rate,
    interval_width,
    mase,
    mean_coverage_rate,
    msiw,
    normalized_global_width,
)
from .report import ResultRow

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConformityScores",
    "Forecast",
    "Frequency",
    "HorizonSpec",
    "MiscoverageRate",
    "PredictionInterval",
    "TimeSeries",
    "UncertaintyThreshold",
    "SplitSpec",
    "ThresholdMode",
    "split_train_calibration",
    "conformity_scores",
    "corrected_level",
    "uncertainty_threshold",
    "build_interval",
    "rolling_calibrate",
    "local_thresholds",
    "global_threshold",
    "ForecasterHandle",
    "naive_forecast",
    "seasonal_naive_forecast",
    "stat_ensemble_light_forecast",
    "EvaluationRecord",
    "AggregateReport",
    "coverage_rate",
    "interval_width",
    "mean_coverage_rate",
    "msiw",
    "mase",
    "normalized_global_width",
    "ExperimentConfig",
    "load_config",
    "run_experiment",
    "run_experiment_detailed",
    "emit_report",
    "plot_series",
    "ResultRow",
]
