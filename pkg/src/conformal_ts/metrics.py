"""Evaluation metrics and their aggregation.

Per-unit coverage rate, interval width and MAE, aggregated into MCR, MSIW
and MASE against a naive-model baseline. Note the deliberate asymmetry:
MSIW is a mean of per-unit width ratios, while MASE is a ratio of summed
errors. Both scaled aggregates equal exactly 1 for the naive model itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import PredictionInterval
from .errors import (
    EmptyTestSet,
    LengthMismatch,
    NaiveZeroError,
    NaiveZeroWidth,
    UnitMismatch,
)

__all__ = [
    "EvaluationRecord",
    "AggregateReport",
    "coverage_rate",
    "interval_width",
    "mean_absolute_error",
    "mean_coverage_rate",
    "msiw",
    "mase",
    "normalized_global_width",
    "aggregate",
]


@dataclass(frozen=True)
class EvaluationRecord:
    """Per-unit coverage rate, interval width and MAE.

    A unit is one series, or one sampled window for single-series datasets.
    """

    unit_id: str
    cr: float
    iw: float
    mae: float

    def __post_init__(self):
        if not (np.isfinite(self.cr) and np.isfinite(self.iw) and np.isfinite(self.mae)):
            raise ValueError(f"non-finite metric for unit {self.unit_id!r}")
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError(f"coverage rate {self.cr} outside [0, 1]")
        if self.iw < 0 or self.mae < 0:
            raise ValueError("interval width and MAE must be nonnegative")


@dataclass(frozen=True)
class AggregateReport:
    """Dataset-level aggregates over evaluation units."""

    mcr: float
    msiw: float
    mase: float
    n_units: int


def coverage_rate(actual, interval: PredictionInterval) -> float:
    """Fraction of actuals inside the interval, bounds inclusive."""
    arr = np.asarray(actual, dtype=np.float64)
    if arr.size != len(interval):
        raise LengthMismatch(f"{arr.size} actuals vs interval of {len(interval)}")
    inside = (interval.lower <= arr) & (arr <= interval.upper)
    return float(np.mean(inside))


def interval_width(interval: PredictionInterval) -> float:
    """Mean width of the band; equals 2*q_hat exactly for SCP intervals."""
    return float(np.mean(interval.upper - interval.lower))


def mean_absolute_error(predicted, actual) -> float:
    """Plain MAE between a point forecast and actuals."""
    p = np.asarray(predicted, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if p.size != a.size:
        raise LengthMismatch(f"{p.size} predictions vs {a.size} actuals")
    return float(np.mean(np.abs(p - a)))


def mean_coverage_rate(records: Sequence[EvaluationRecord]) -> float:
    """Unweighted mean of per-unit coverage rates."""
    if not records:
        raise EmptyTestSet("no evaluation units")
    return float(np.mean([r.cr for r in records]))


def _pair_by_unit(
    model_records: Sequence[EvaluationRecord],
    naive_records: Sequence[EvaluationRecord],
) -> list[tuple[EvaluationRecord, EvaluationRecord]]:
    if not model_records or not naive_records:
        raise EmptyTestSet("no evaluation units")
    naive_by_id = {r.unit_id: r for r in naive_records}
    model_ids = [r.unit_id for r in model_records]
    if set(model_ids) != set(naive_by_id) or len(model_ids) != len(naive_by_id):
        raise UnitMismatch("model and naive records cover different units")
    return [(r, naive_by_id[r.unit_id]) for r in model_records]


def msiw(
    model_records: Sequence[EvaluationRecord],
    naive_records: Sequence[EvaluationRecord],
) -> float:
    """Mean over units of the per-unit width ratio (mean of ratios)."""
    pairs = _pair_by_unit(model_records, naive_records)
    ratios = []
    for model, naive in pairs:
        if naive.iw == 0.0:
            raise NaiveZeroWidth(naive.unit_id)
        ratios.append(model.iw / naive.iw)
    return float(np.mean(ratios))


def mase(
    model_records: Sequence[EvaluationRecord],
    naive_records: Sequence[EvaluationRecord],
) -> float:
    """Summed model MAE over summed naive MAE (ratio of sums)."""
    pairs = _pair_by_unit(model_records, naive_records)
    naive_total = sum(naive.mae for _, naive in pairs)
    if naive_total <= 0.0:
        raise NaiveZeroError("summed naive MAE is zero")
    model_total = sum(model.mae for model, _ in pairs)
    return model_total / naive_total


def normalized_global_width(model_iw: float, naive_iw: float) -> float:
    """Width ratio for global-quantile mode, one width per dataset."""
    if naive_iw <= 0.0:
        raise NaiveZeroWidth("<global>")
    return model_iw / naive_iw


def aggregate(
    model_records: Sequence[EvaluationRecord],
    naive_records: Sequence[EvaluationRecord],
) -> AggregateReport:
    """MCR/MSIW/MASE of a model against its naive baseline records."""
    return AggregateReport(
        mcr=mean_coverage_rate(model_records),
        msiw=msiw(model_records, naive_records),
        mase=mase(model_records, naive_records),
        n_units=len(model_records),
    )
