"""Built-in baseline forecasters behind a single forecaster interface.

All built-ins are deterministic: identical inputs give bitwise-identical
outputs. Smoothing parameters are never fitted by a numerical optimizer;
they come from a dense deterministic grid (step 0.01 over (0, 1)),
coordinate-wise for the three Holt-Winters parameters.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .domain import Forecast
from .errors import (
    ConfigError,
    ContextShorterThanSeason,
    ContextTooShort,
    EmptyContext,
)

__all__ = [
    "ForecasterHandle",
    "naive_forecast",
    "seasonal_naive_forecast",
    "ses_forecast",
    "holt_winters_forecast",
    "theta_forecast",
    "stat_ensemble_light_forecast",
    "resolve_builtin",
]

BUILTIN_KINDS = ("naive", "seasonal_naive", "stat_ensemble_light")
KINDS = BUILTIN_KINDS + ("external",)

_GRID = np.arange(1, 100) / 100.0  # 0.01 .. 0.99


@dataclass(frozen=True)
class ForecasterHandle:
    """Names one estimator in a harness run.

    ``kind`` selects a built-in method or the external bridge; kind-specific
    parameters (season_length, endpoint, ...) travel in ``params``.
    """

    name: str
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown forecaster kind {self.kind!r}")
        if self.kind == "external" and "endpoint" not in self.params:
            raise ConfigError(f"external forecaster {self.name!r} needs an endpoint")
        if not self.name:
            raise ConfigError("forecaster name must be nonempty")


def _context_array(context) -> np.ndarray:
    arr = np.asarray(context, dtype=np.float64)
    if arr.size == 0:
        raise EmptyContext("forecaster received an empty context")
    return arr


def naive_forecast(context, horizon: int) -> Forecast:
    """Repeat the most recently observed value over the horizon."""
    arr = _context_array(context)
    return Forecast(point=np.full(int(horizon), arr[-1]))


def seasonal_naive_forecast(context, season_length: int, horizon: int) -> Forecast:
    """Cyclically repeat the last known season over the horizon."""
    arr = _context_array(context)
    m = int(season_length)
    if m < 1:
        raise ConfigError("season_length must be positive")
    if arr.size < m:
        raise ContextShorterThanSeason(
            f"context of {arr.size} points is shorter than season {m}"
        )
    last_season = arr[arr.size - m :]
    idx = np.arange(int(horizon)) % m
    return Forecast(point=last_season[idx])


# --- simple exponential smoothing ------------------------------------------


def _ses_sse_grid(x: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """One-step-ahead SSE of SES for every smoothing value, in one pass."""
    level = np.full(alphas.shape, x[0])
    sse = np.zeros(alphas.shape)
    for t in range(1, x.size):
        err = x[t] - level
        sse += err * err
        level += alphas * err
    return sse


def _ses_level(x: np.ndarray, alpha: float) -> float:
    level = x[0]
    for t in range(1, x.size):
        level += alpha * (x[t] - level)
    return float(level)


def ses_forecast(context, horizon: int) -> Forecast:
    """Simple exponential smoothing, flat forecast at the final level.

    The smoothing value minimizes one-step-ahead squared error over the
    dense grid; ties resolve to the smallest value.
    """
    arr = _context_array(context)
    if arr.size < 2:
        return naive_forecast(arr, horizon)
    alpha = float(_GRID[int(np.argmin(_ses_sse_grid(arr, _GRID)))])
    return Forecast(point=np.full(int(horizon), _ses_level(arr, alpha)))


# --- additive Holt-Winters --------------------------------------------------


def _hw_init(x: np.ndarray, m: int) -> tuple[float, float, np.ndarray]:
    if m == 1:
        return float(x[0]), float(x[1] - x[0]), np.zeros(1)
    level = float(np.mean(x[:m]))
    trend = float((np.mean(x[m : 2 * m]) - np.mean(x[:m])) / m)
    season = x[:m] - level
    return level, trend, season


def _hw_sse_grid(
    x: np.ndarray, m: int, alphas: np.ndarray, betas: np.ndarray, gammas: np.ndarray
) -> np.ndarray:
    """One-step-ahead SSE for G parameter triples evaluated in parallel."""
    g = alphas.shape
    l0, t0, s0 = _hw_init(x, m)
    level = np.full(g, l0)
    trend = np.full(g, t0)
    season = np.tile(s0[:, None], (1, g[0]))  # (m, G), cyclic buffer
    sse = np.zeros(g)
    start = m if m > 1 else 1
    for t in range(start, x.size):
        s_prev = season[t % m]
        err = x[t] - (level + trend + s_prev)
        sse += err * err
        new_level = alphas * (x[t] - s_prev) + (1.0 - alphas) * (level + trend)
        trend = betas * (new_level - level) + (1.0 - betas) * trend
        if m > 1:
            season[t % m] = gammas * (x[t] - new_level) + (1.0 - gammas) * s_prev
        level = new_level
    return sse


def _hw_run(
    x: np.ndarray, m: int, alpha: float, beta: float, gamma: float, horizon: int
) -> np.ndarray:
    level, trend, season_init = _hw_init(x, m)
    season = season_init.copy()
    start = m if m > 1 else 1
    for t in range(start, x.size):
        s_prev = season[t % m]
        new_level = alpha * (x[t] - s_prev) + (1.0 - alpha) * (level + trend)
        trend = beta * (new_level - level) + (1.0 - beta) * trend
        if m > 1:
            season[t % m] = gamma * (x[t] - new_level) + (1.0 - gamma) * s_prev
        level = new_level
    k = np.arange(1, int(horizon) + 1)
    seasonal = season[(x.size + k - 1) % m] if m > 1 else 0.0
    return level + k * trend + seasonal


def holt_winters_forecast(context, season_length: int, horizon: int) -> Forecast:
    """Additive Holt-Winters (Holt's linear when season_length is 1).

    Smoothing parameters come from a coordinate-wise search over the dense
    grid, two deterministic sweeps, minimizing one-step-ahead squared error.
    """
    arr = _context_array(context)
    m = int(season_length)
    if m < 1:
        raise ConfigError("season_length must be positive")
    minimum = max(2 * m, 2)
    if arr.size < minimum:
        raise ContextTooShort(
            f"Holt-Winters needs at least {minimum} points for season {m}, "
            f"got {arr.size}"
        )
    params = [0.5, 0.1, 0.1]
    for _ in range(2):
        for i in range(3):
            grids = [np.full(_GRID.shape, p) for p in params]
            grids[i] = _GRID
            sse = _hw_sse_grid(arr, m, *grids)
            params[i] = float(_GRID[int(np.argmin(sse))])
    return Forecast(point=_hw_run(arr, m, *params, horizon))


# --- classic Theta ----------------------------------------------------------


def theta_forecast(context, horizon: int) -> Forecast:
    """Classic Theta method with theta = 2.

    Decomposes the series into the least-squares trend line (theta-line 0)
    and the double-curvature line (theta-line 2), extrapolates the first
    linearly and the second flat via SES, and averages the two with equal
    weights. On trending data this behaves like SES with drift equal to
    half the fitted slope.
    """
    arr = _context_array(context)
    n = arr.size
    if n < 2:
        return naive_forecast(arr, horizon)
    t = np.arange(n, dtype=np.float64)
    slope, intercept = np.polyfit(t, arr, 1)
    trend_line = intercept + slope * t
    theta2 = 2.0 * arr - trend_line
    if np.ptp(theta2) == 0.0:
        ses_level = float(theta2[0])
    else:
        alpha = float(_GRID[int(np.argmin(_ses_sse_grid(theta2, _GRID)))])
        ses_level = _ses_level(theta2, alpha)
    k = np.arange(1, int(horizon) + 1)
    line_part = intercept + slope * (n - 1 + k)
    return Forecast(point=0.5 * (line_part + ses_level))


# --- ensemble ----------------------------------------------------------------


def stat_ensemble_light_forecast(
    context,
    season_length: int,
    horizon: int,
    allow_short_season_fallback: bool = False,
) -> Forecast:
    """Mean of SES, additive Holt-Winters and classic Theta forecasts.

    Needs at least max(2 * season_length, 10) points. When the context
    cannot support the seasonal member and ``allow_short_season_fallback``
    is set, Holt-Winters is dropped (with a warning) instead of failing;
    without the flag the short context is an error.
    """
    arr = _context_array(context)
    m = int(season_length)
    if m < 1:
        raise ConfigError("season_length must be positive")
    if arr.size < 10:
        raise ContextTooShort(
            f"statistical ensemble needs at least 10 points, got {arr.size}"
        )
    members = [ses_forecast(arr, horizon).point]
    if arr.size >= 2 * m:
        members.append(holt_winters_forecast(arr, m, horizon).point)
    elif allow_short_season_fallback:
        warnings.warn(
            f"context of {arr.size} points cannot fit season {m}; "
            "dropping the Holt-Winters member",
            stacklevel=2,
        )
    else:
        raise ContextTooShort(
            f"statistical ensemble needs {2 * m} points for season {m}, "
            f"got {arr.size} (set allow_short_season_fallback to drop "
            "the seasonal member)"
        )
    members.append(theta_forecast(arr, horizon).point)
    return Forecast(point=np.mean(members, axis=0))


def resolve_builtin(handle: ForecasterHandle, season_length: int):
    """Turn a built-in handle into a ``(context, horizon) -> Forecast`` callable.

    ``season_length`` is the harness-chosen seasonality for this estimator
    (the horizon itself for seasonal-naive CP runs, the frequency default
    for the statistical ensemble); an explicit ``season_length`` in the
    handle's params wins.
    """
    m = int(handle.params.get("season_length", season_length))
    if handle.kind == "naive":
        return lambda context, horizon: naive_forecast(context, horizon)
    if handle.kind == "seasonal_naive":
        return lambda context, horizon: seasonal_naive_forecast(context, m, horizon)
    if handle.kind == "stat_ensemble_light":
        fallback = bool(handle.params.get("short_season_fallback", False))
        return lambda context, horizon: stat_ensemble_light_forecast(
            context, m, horizon, allow_short_season_fallback=fallback
        )
    raise ConfigError(f"{handle.kind!r} is not a built-in forecaster")
