"""
Rolling-window calibration
==========================

Zero-shot forecasters have no training phase, so everything after the
first context window can produce calibration residuals: forecast H steps
from the last C observed points, score them, shift forward by H, and keep
only the first r scores of the final partial window. A series of N points
always yields exactly N - C scores.
"""

from collections import Counter

from conformal_ts import rolling_calibrate, uncertainty_threshold
from conformal_ts.datasets import synth_iid
from conformal_ts.forecasters import naive_forecast

series = synth_iid(2232, mean=50.0, sigma=4.0, seed=11)
context, horizon = 512, 24

scores = rolling_calibrate(series, naive_forecast, context, horizon)
print(f"N={len(series)} C={context} H={horizon} -> {len(scores)} scores")

# Window accounting: 71 full windows of 24, then 16 retained from the last
# partial forecast (2232 - 512 = 71 * 24 + 16).
per_window = Counter(window for (_, window, _) in scores.provenance)
print(f"windows: {len(per_window)} (last one keeps {per_window[max(per_window)]} scores)")

threshold = uncertainty_threshold(scores, alpha=0.1)
print(
    f"q_hat={threshold.q_hat:.3f} at corrected level {threshold.level:.4f} "
    f"from {threshold.calibration_size} scores"
)

# More data, same arithmetic: a year of hourly points.
year = synth_iid(8760, mean=50.0, sigma=4.0, seed=12)
print(f"N=8760 C=512 -> {len(rolling_calibrate(year, naive_forecast, 512, 24))} scores")
