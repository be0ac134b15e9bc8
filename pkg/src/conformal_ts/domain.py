"""Core value types shared by every other module.

Everything here is immutable after construction and safe to share across
concurrent workers. Numeric payloads are 64-bit floats; metric arithmetic
elsewhere stays in 64-bit as well.
"""

from __future__ import annotations

import calendar
import enum
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import ConfigError, LengthMismatch

__all__ = [
    "Frequency",
    "TimeSeries",
    "HorizonSpec",
    "HORIZON_TABLE",
    "Forecast",
    "ConformityScores",
    "UncertaintyThreshold",
    "PredictionInterval",
    "MiscoverageRate",
    "add_months",
]


def _freeze(values) -> np.ndarray:
    """Copy into a read-only float64 array."""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D sequence, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


def add_months(ts: datetime, months: int) -> datetime:
    """Shift a timestamp by whole calendar months, clamping the day."""
    k = ts.month - 1 + months
    year = ts.year + k // 12
    month = k % 12 + 1
    day = min(ts.day, calendar.monthrange(year, month)[1])
    return ts.replace(year=year, month=month, day=day)


class Frequency(enum.Enum):
    """Sampling frequency of a series, with its default season length."""

    HOURLY = "H"
    DAILY = "D"
    WEEKLY = "W"
    MONTHLY = "M"

    @property
    def default_season_length(self) -> int:
        return _SEASON_LENGTHS[self]

    @property
    def code(self) -> str:
        return self.value

    @classmethod
    def from_code(cls, code: str) -> "Frequency":
        try:
            return cls(code)
        except ValueError:
            raise ConfigError(f"unknown frequency code {code!r}") from None

    def shift(self, ts: datetime, steps: int) -> datetime:
        """Timestamp ``steps`` sampling intervals after ``ts``."""
        if self is Frequency.MONTHLY:
            return add_months(ts, steps)
        return ts + _FIXED_STEPS[self] * steps


_SEASON_LENGTHS = {
    Frequency.HOURLY: 24,
    Frequency.DAILY: 7,
    Frequency.WEEKLY: 4,
    Frequency.MONTHLY: 12,
}

_FIXED_STEPS = {
    Frequency.HOURLY: timedelta(hours=1),
    Frequency.DAILY: timedelta(days=1),
    Frequency.WEEKLY: timedelta(weeks=1),
}


@dataclass(frozen=True)
class TimeSeries:
    """One uniformly sampled series.

    Timestamps are derived (``start`` + index * frequency step) rather than
    stored per point, which forbids gaps by construction. Values are stored
    as a read-only float64 array and must be finite.
    """

    id: str
    start: datetime
    frequency: Frequency
    values: np.ndarray

    def __post_init__(self):
        arr = _freeze(self.values)
        if arr.size < 1:
            raise ValueError("a series needs at least one point")
        if not np.isfinite(arr).all():
            raise ValueError(f"series {self.id!r} contains NaN/inf values")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    def timestamp_at(self, index: int) -> datetime:
        return self.frequency.shift(self.start, index)

    def slice(self, begin: int, end: int, id_suffix: str = "") -> "TimeSeries":
        """Contiguous sub-series covering ``values[begin:end]``."""
        if not 0 <= begin < end <= len(self):
            raise ValueError(f"invalid slice [{begin}:{end}] of {len(self)} points")
        return TimeSeries(
            id=self.id + id_suffix,
            start=self.timestamp_at(begin),
            frequency=self.frequency,
            values=self.values[begin:end],
        )


# (frequency, label) -> horizon steps
HORIZON_TABLE: dict[tuple[Frequency, str], int] = {
    (Frequency.HOURLY, "S"): 24,
    (Frequency.HOURLY, "M"): 72,
    (Frequency.HOURLY, "L"): 168,
    (Frequency.DAILY, "S"): 7,
    (Frequency.DAILY, "M"): 21,
    (Frequency.DAILY, "L"): 35,
    (Frequency.WEEKLY, "S"): 4,
    (Frequency.WEEKLY, "M"): 8,
    (Frequency.WEEKLY, "L"): 12,
    (Frequency.MONTHLY, "S"): 3,
    (Frequency.MONTHLY, "M"): 6,
    (Frequency.MONTHLY, "L"): 9,
}


@dataclass(frozen=True)
class HorizonSpec:
    """A forecasting horizon: a short label plus the number of steps."""

    label: str
    steps: int

    def __post_init__(self):
        if self.label not in ("S", "M", "L"):
            raise ConfigError(f"horizon label must be S, M or L, got {self.label!r}")
        if self.steps < 1:
            raise ConfigError("horizon steps must be positive")

    @classmethod
    def for_frequency(
        cls,
        frequency: Frequency,
        label: str,
        steps: int | None = None,
        strict: bool = True,
    ) -> "HorizonSpec":
        """Build a horizon for a frequency.

        Without ``steps`` the canonical step count for (frequency, label) is
        used. With ``steps`` and ``strict`` on, any triple deviating from the
        canonical table is rejected.
        """
        expected = HORIZON_TABLE.get((frequency, label))
        if expected is None:
            raise ConfigError(f"horizon label must be S, M or L, got {label!r}")
        if steps is None:
            steps = expected
        elif strict and steps != expected:
            raise ConfigError(
                f"horizon {label} at {frequency.code} frequency must be "
                f"{expected} steps, got {steps}"
            )
        return cls(label=label, steps=steps)


@dataclass(frozen=True)
class Forecast:
    """A point forecast over a horizon."""

    point: np.ndarray

    def __post_init__(self):
        arr = _freeze(self.point)
        if not np.isfinite(arr).all():
            raise ValueError("forecast contains NaN/inf values")
        object.__setattr__(self, "point", arr)

    def __len__(self) -> int:
        return int(self.point.size)


@dataclass(frozen=True)
class ConformityScores:
    """Nonnegative absolute residuals from calibration passes.

    ``provenance[i]`` records (series_id, window_index, offset) for
    ``scores[i]``; it may be left empty when the origin is unknown, but a
    nonempty provenance must cover every score.
    """

    scores: np.ndarray
    provenance: tuple[tuple[str, int, int], ...] = field(default=())

    def __post_init__(self):
        arr = _freeze(self.scores)
        if arr.size and arr.min() < 0:
            raise ValueError("conformity scores must be nonnegative")
        prov = tuple(tuple(p) for p in self.provenance)
        if prov and len(prov) != arr.size:
            raise LengthMismatch(
                f"{len(prov)} provenance entries for {arr.size} scores"
            )
        object.__setattr__(self, "scores", arr)
        object.__setattr__(self, "provenance", prov)

    def __len__(self) -> int:
        return int(self.scores.size)


@dataclass(frozen=True)
class UncertaintyThreshold:
    """The corrected-level quantile of a score set.

    ``q_hat`` is always an order statistic of the source scores (the maximum
    when the corrected level clamps to 1).
    """

    q_hat: float
    level: float
    calibration_size: int

    def __post_init__(self):
        if self.q_hat < 0:
            raise ValueError("q_hat must be nonnegative")
        if not 0 < self.level <= 1:
            raise ValueError("level must lie in (0, 1]")
        if self.calibration_size < 1:
            raise ValueError("calibration_size must be positive")


@dataclass(frozen=True)
class PredictionInterval:
    """Lower/upper bands around a point forecast.

    The type admits any band satisfying lower <= center <= upper; the
    constant-width symmetric shape is the contract of
    :func:`conformal_ts.conformal.build_interval`.
    """

    lower: np.ndarray
    upper: np.ndarray
    center: Forecast

    def __post_init__(self):
        lower = _freeze(self.lower)
        upper = _freeze(self.upper)
        if not (lower.size == upper.size == len(self.center)):
            raise LengthMismatch(
                f"interval sides {lower.size}/{upper.size} vs center {len(self.center)}"
            )
        if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
            raise ValueError("interval bounds contain NaN/inf values")
        if np.any(lower > self.center.point) or np.any(self.center.point > upper):
            raise ValueError("interval must satisfy lower <= center <= upper")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def __len__(self) -> int:
        return int(self.lower.size)


@dataclass(frozen=True)
class MiscoverageRate:
    """Allowed fraction of points outside the interval (target = 1 - alpha)."""

    alpha: float = 0.1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def target_coverage(self) -> float:
        return 1.0 - self.alpha
