"""Gradient-boosting baseline fitted per request.

Direct multi-step regression: one model trained on lag features
{h, h+1, ..., h+m} (m = the frequency's season length) plus cyclic
calendar proxies, predicting every horizon step from history alone.
The wire protocol carries no absolute timestamps, so calendar features
are position-anchored phases (hour-of-day as index mod 24, and so on).
Rows whose lags would reach before the context start are dropped.
"""

from __future__ import annotations

import numpy as np
from sklearn.ensemble import HistGradientBoostingRegressor

from .errors import InsufficientHistory

SEASON_LENGTHS = {"H": 24, "D": 7, "W": 4, "M": 12}


def _phase_features(positions: np.ndarray, freq: str) -> np.ndarray:
    """Cyclic calendar proxies for 0-based positions within the context."""
    if freq == "H":
        return np.column_stack([positions % 24, (positions // 24) % 7])
    if freq == "D":
        return np.column_stack([positions % 7, (positions // 7) % 52])
    if freq == "W":
        return np.column_stack([positions % 52])
    return np.column_stack([positions % 12])


def _design(values: np.ndarray, positions: np.ndarray, h: int, m: int, freq: str):
    lags = np.column_stack([values[positions - h - j] for j in range(m + 1)])
    return np.hstack([lags, _phase_features(positions, freq)])


def gbdt_forecast(
    context,
    h: int,
    frequency: str,
    season_length: int | None = None,
    seed: int = 0,
) -> list[float]:
    """Forecast ``h`` steps with default-hyperparameter gradient boosting."""
    values = np.asarray(context, dtype=np.float64)
    n = values.size
    m = int(season_length) if season_length else SEASON_LENGTHS.get(frequency, 1)
    if n < h + m + 1:
        raise InsufficientHistory(
            f"gbdt needs at least h+m+1 = {h + m + 1} points "
            f"(h={h}, m={m}), got {n}"
        )

    train_positions = np.arange(h + m, n)
    x_train = _design(values, train_positions, h, m, frequency)
    y_train = values[train_positions]

    model = HistGradientBoostingRegressor(random_state=seed)
    model.fit(x_train, y_train)

    # every lag of positions n..n+h-1 lands inside the observed context
    x_future = _design(values, np.arange(n, n + h), h, m, frequency)
    return [float(v) for v in model.predict(x_future)]
