"""
A complete benchmark run
========================

Run several estimators over a multi-series dataset, aggregate coverage,
width and error against the naive baseline, and write the report files
(CSV/JSON tables, a markdown summary, and one bubble chart per horizon).
Equivalent CLI: conformal-ts run --config <file>.
"""

import tempfile
from pathlib import Path

from conformal_ts.datasets import synth_seasonal, write_long_csv
from conformal_ts.forecasters import ForecasterHandle
from conformal_ts.harness import (
    DatasetSource,
    EstimatorSpec,
    ExperimentConfig,
    ScenarioSpec,
    emit_report,
    run_experiment,
)

workdir = Path(tempfile.mkdtemp(prefix="conformal-ts-demo-"))

# Twenty noisy daily-seasonal series, two years long.
series = [
    synth_seasonal(730, m=7, amplitude=12.0, noise=3.0, seed=i, mean=80.0,
                   series_id=f"branch-{i:02d}")
    for i in range(20)
]
data_path = workdir / "branches.csv"
write_long_csv(data_path, series)

config = ExperimentConfig(
    dataset=DatasetSource(name="branches", path=str(data_path)),
    # hold out the final week of every series; units are series
    scenarios=(ScenarioSpec(horizon_label="S", horizon_steps=7, per_series=True),),
    estimators=(
        EstimatorSpec(handle=ForecasterHandle(name="naive", kind="naive")),
        EstimatorSpec(handle=ForecasterHandle(name="seasonal_naive", kind="seasonal_naive")),
        EstimatorSpec(handle=ForecasterHandle(name="stat_ensemble", kind="stat_ensemble_light")),
    ),
)

rows = run_experiment(config)
print(f"{'model':<16} {'MASE':>6} {'MCR %':>6} {'IW':>8} {'MSIW':>6}")
for row in rows:
    print(
        f"{row.estimator:<16} {row.mase:>6.3f} {100 * row.mcr:>6.1f} "
        f"{row.iw:>8.2f} {row.msiw:>6.3f}"
    )

written = emit_report(rows, workdir / "report", alpha=0.1)
print("\nreport files:")
for path in written:
    print(f"  {path}")
