"""Split conformal prediction.

Splitting, conformity scoring via rolling windows, corrected-quantile
thresholds (local and global), and interval construction. The quantile is
always an exact order statistic, never interpolated: interpolation would
break both the finite-sample coverage guarantee and the invariant that the
threshold is an element of the score multiset.

The coverage guarantee assumes exchangeable residuals. Real time series
rarely satisfy that, so empirical coverage on trending or regime-shifting
data may fall short of the target; the method is implemented verbatim
rather than compensating for it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .domain import (
    ConformityScores,
    Forecast,
    MiscoverageRate,
    PredictionInterval,
    TimeSeries,
    UncertaintyThreshold,
)
from .errors import (
    ConfigError,
    ContextTooLong,
    EmptyCalibration,
    ForecasterFailure,
    LengthMismatch,
    SeriesTooShort,
)

__all__ = [
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
]

# A forecaster, for calibration purposes, is anything mapping
# (context values, horizon) to a point forecast of that horizon.
ForecastFn = Callable[[np.ndarray, int], Sequence[float]]


class ThresholdMode(enum.Enum):
    """Per-series thresholds vs one threshold pooled over all series."""

    LOCAL = "local"
    GLOBAL = "global"


@dataclass(frozen=True)
class SplitSpec:
    """How to divide a series into train/context and calibration parts.

    Either a train fraction in (0, 1) or an absolute context length.
    """

    train_fraction: float | None = None
    context_length: int | None = None

    def __post_init__(self):
        if (self.train_fraction is None) == (self.context_length is None):
            raise ConfigError("specify exactly one of train_fraction/context_length")
        if self.train_fraction is not None and not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.context_length is not None and self.context_length < 1:
            raise ConfigError("context_length must be positive")

    @classmethod
    def fraction(cls, train_fraction: float) -> "SplitSpec":
        return cls(train_fraction=train_fraction)

    @classmethod
    def context(cls, context_length: int) -> "SplitSpec":
        return cls(context_length=context_length)

    def train_size(self, n: int) -> int:
        """Number of points on the train/context side for a series of length n."""
        if self.context_length is not None:
            return self.context_length
        # round half up, so e.g. 0.5 of 5 points gives 3
        return int(math.floor(self.train_fraction * n + 0.5))


def split_train_calibration(
    series: TimeSeries, spec: SplitSpec
) -> tuple[TimeSeries, TimeSeries]:
    """Split a series into a contiguous train part followed by calibration.

    Both sides keep at least one point; the train part strictly precedes the
    calibration part and together they cover the series exactly.
    """
    n = len(series)
    n_train = spec.train_size(n)
    if n_train < 1 or n_train > n - 1:
        raise SeriesTooShort(
            f"split leaves {n_train} train / {n - n_train} calibration points "
            f"for series of length {n}"
        )
    return series.slice(0, n_train), series.slice(n_train, n)


def conformity_scores(predicted: Forecast, actual) -> ConformityScores:
    """Absolute residuals |predicted - actual|, order preserved."""
    actual = np.asarray(actual, dtype=np.float64)
    if actual.size != len(predicted):
        raise LengthMismatch(
            f"{len(predicted)} predictions vs {actual.size} actuals"
        )
    if actual.size and not np.isfinite(actual).all():
        raise ValueError("actual values must be finite")
    return ConformityScores(scores=np.abs(predicted.point - actual))


def _alpha_value(alpha: float | MiscoverageRate) -> float:
    if isinstance(alpha, MiscoverageRate):
        return alpha.alpha
    return MiscoverageRate(float(alpha)).alpha


def _corrected_rank(n: int, alpha: float | MiscoverageRate) -> int:
    """ceil((n+1)(1-alpha)) computed in exact rational arithmetic.

    The product is never formed in floating point: for example at n=99,
    alpha=0.1 a float product of 90.000000000000014 would ceil to 91 and
    silently shift the order statistic by one.
    """
    a = Fraction(repr(_alpha_value(alpha)))
    return math.ceil((n + 1) * (1 - a))


def corrected_level(
    calibration_size: int, alpha: float | MiscoverageRate
) -> float:
    """Finite-sample corrected quantile level, clamped to at most 1."""
    if calibration_size < 1:
        raise ValueError("calibration_size must be positive")
    k = _corrected_rank(calibration_size, alpha)
    return min(1.0, k / calibration_size)


def uncertainty_threshold(
    scores: ConformityScores, alpha: float | MiscoverageRate
) -> UncertaintyThreshold:
    """Corrected-level empirical quantile of the conformity scores.

    Returns the k-th smallest score for k = ceil((n+1)(1-alpha)); when the
    corrected level clamps to 1 (k > n) the maximum score is used. The result
    is always one of the score values.
    """
    n = len(scores)
    if n == 0:
        raise EmptyCalibration()
    k = _corrected_rank(n, alpha)
    ordered = np.sort(scores.scores)
    q_hat = float(ordered[min(k, n) - 1])
    return UncertaintyThreshold(
        q_hat=q_hat,
        level=min(1.0, k / n),
        calibration_size=n,
    )


def build_interval(
    center: Forecast, threshold: UncertaintyThreshold
) -> PredictionInterval:
    """Constant-width symmetric band center +- q_hat, never clipped."""
    q = threshold.q_hat
    return PredictionInterval(
        lower=center.point - q,
        upper=center.point + q,
        center=center,
    )


def rolling_calibrate(
    series: TimeSeries,
    forecaster: ForecastFn,
    context_length: int,
    horizon: int,
) -> ConformityScores:
    """Harvest conformity scores by rolling a fixed context over the series.

    Each window forecasts ``horizon`` points from the ``context_length``
    ground-truth points before it, scores them against the actuals, and
    shifts forward by ``horizon``. The final partial window (r remaining
    points, 0 <= r < horizon) still issues a full forecast but keeps only
    its first r scores; r = 0 skips the extra forecast entirely. Exactly
    ``len(series) - context_length`` scores come back.
    """
    n = len(series)
    c = int(context_length)
    h = int(horizon)
    if h < 1:
        raise ValueError("horizon must be positive")
    if c < 1:
        raise ValueError("context_length must be positive")
    if c + 1 > n:
        raise ContextTooLong(
            f"context of {c} points leaves no calibration points in a series of {n}"
        )

    values = series.values
    chunks: list[np.ndarray] = []
    provenance: list[tuple[str, int, int]] = []
    window_index = 0
    t = c
    while t < n:
        context = values[t - c : t]
        retained = min(h, n - t)
        try:
            result = forecaster(context, h)
            if isinstance(result, Forecast):
                result = result.point
            point = np.asarray(result, dtype=np.float64)
        except Exception as exc:
            raise ForecasterFailure(
                f"forecaster failed on window {window_index} of series {series.id!r}: {exc}"
            ) from exc
        if point.shape != (h,):
            raise ForecasterFailure(
                f"forecaster returned shape {point.shape}, expected ({h},) "
                f"on window {window_index} of series {series.id!r}"
            )
        if not np.isfinite(point).all():
            raise ForecasterFailure(
                f"forecaster returned non-finite values on window {window_index} "
                f"of series {series.id!r}"
            )
        chunks.append(np.abs(point[:retained] - values[t : t + retained]))
        provenance.extend(
            (series.id, window_index, offset) for offset in range(retained)
        )
        window_index += 1
        t += h

    return ConformityScores(
        scores=np.concatenate(chunks),
        provenance=tuple(provenance),
    )


def local_thresholds(
    per_series_scores: Mapping[str, ConformityScores],
    alpha: float | MiscoverageRate,
) -> dict[str, UncertaintyThreshold]:
    """One independent threshold per series."""
    out: dict[str, UncertaintyThreshold] = {}
    for series_id, scores in per_series_scores.items():
        if len(scores) == 0:
            raise EmptyCalibration(series_id)
        out[series_id] = uncertainty_threshold(scores, alpha)
    return out


def global_threshold(
    per_series_scores: Mapping[str, ConformityScores],
    alpha: float | MiscoverageRate,
) -> UncertaintyThreshold:
    """Single threshold from the pooled multiset of all series' scores.

    The corrected level uses the pooled cardinality.
    """
    parts = [s.scores for s in per_series_scores.values() if len(s)]
    if not parts:
        raise EmptyCalibration()
    # pooled provenance only survives when every part carries it
    if all(s.provenance for s in per_series_scores.values() if len(s)):
        provenance = tuple(
            p for s in per_series_scores.values() for p in s.provenance
        )
    else:
        provenance = ()
    pooled = ConformityScores(scores=np.concatenate(parts), provenance=provenance)
    return uncertainty_threshold(pooled, alpha)
