"""
Split conformal prediction, step by step
========================================

Build a constant-width prediction interval around a point forecast:
split the history, score a forecaster on the calibration part, take the
corrected-level quantile of the absolute residuals, and widen the point
forecast by that amount.
"""

from conformal_ts import (
    SplitSpec,
    build_interval,
    conformity_scores,
    corrected_level,
    split_train_calibration,
    uncertainty_threshold,
)
from conformal_ts.datasets import synth_seasonal
from conformal_ts.forecasters import seasonal_naive_forecast
from conformal_ts.metrics import coverage_rate, interval_width

# A noisy daily-seasonal series: 70 days of history plus 7 to predict.
series = synth_seasonal(77 * 1, m=7, amplitude=10.0, noise=2.0, seed=3, mean=100.0)
history = series.slice(0, 70)
future = series.values[70:]

# Step 1: split. 80% of the history trains the forecaster, the rest
# measures how wrong it tends to be.
train, calibration = split_train_calibration(history, SplitSpec.fraction(0.8))
print(f"history={len(history)} -> train={len(train)} calibration={len(calibration)}")

# Steps 2-3: forecast the calibration stretch and score it.
fitted = seasonal_naive_forecast(train.values, 7, len(calibration))
scores = conformity_scores(fitted, calibration.values)
print(f"calibration residuals: min={scores.scores.min():.2f} max={scores.scores.max():.2f}")

# Step 4: the uncertainty threshold is an order statistic of those scores,
# at a level corrected for the finite calibration size.
alpha = 0.1
print(f"corrected level for n={len(scores)}: {corrected_level(len(scores), alpha):.4f}")
threshold = uncertainty_threshold(scores, alpha)
print(f"q_hat = {threshold.q_hat:.3f} (an actual residual, never interpolated)")

# Step 5: the interval is the point forecast widened by q_hat on both sides.
point = seasonal_naive_forecast(history.values, 7, 7)
interval = build_interval(point, threshold)
print(f"interval width = {interval_width(interval):.3f} (always 2*q_hat)")
print(f"coverage on the 7 held-out days: {coverage_rate(future, interval):.2f}")
