"""Result serialization and chart rendering.

Everything here is a pure function of its inputs so that re-emitting the
same rows produces byte-identical files. SVG is written directly (no
plotting backend) to keep the output deterministic.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .domain import PredictionInterval, TimeSeries

__all__ = [
    "ResultRow",
    "render_results_csv",
    "render_results_json",
    "parse_results_json",
    "render_markdown",
    "render_bubble_chart",
    "render_series_plot",
]


@dataclass(frozen=True)
class ResultRow:
    """One (dataset, horizon, estimator) cell of the benchmark."""

    dataset: str
    horizon_label: str
    estimator: str
    mase: float
    mcr: float
    iw: float
    msiw: float
    n_units: int
    failures: int


_CSV_COLUMNS = [
    "dataset",
    "horizon_label",
    "estimator",
    "mase",
    "mcr",
    "iw",
    "msiw",
    "n_units",
    "failures",
]


def _num(value: float) -> str:
    # repr round-trips doubles exactly; NaN stays readable
    return "" if isinstance(value, float) and np.isnan(value) else repr(value)


def render_results_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.dataset,
                row.horizon_label,
                row.estimator,
                _num(row.mase),
                _num(row.mcr),
                _num(row.iw),
                _num(row.msiw),
                row.n_units,
                row.failures,
            ]
        )
    return buf.getvalue()


def render_results_json(rows: Sequence[ResultRow], alpha: float) -> str:
    payload = {"alpha": alpha, "rows": [asdict(r) for r in rows]}
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"


def parse_results_json(text: str) -> tuple[list[ResultRow], float]:
    payload = json.loads(text)
    rows = [ResultRow(**entry) for entry in payload["rows"]]
    return rows, float(payload["alpha"])


def _fmt3(value: float) -> str:
    return "nan" if np.isnan(value) else f"{value:.3f}"


def render_markdown(rows: Sequence[ResultRow]) -> str:
    """Human-readable table: per dataset, horizon blocks with one line per model."""
    lines: list[str] = ["# Benchmark results", ""]
    datasets: dict[str, list[ResultRow]] = {}
    for row in rows:
        datasets.setdefault(row.dataset, []).append(row)
    for dataset, group in datasets.items():
        lines.append(f"## {dataset}")
        lines.append("")
        lines.append("| Horizon | Model | MASE | MCR | IW | MSIW | units | failures |")
        lines.append("|---|---|---|---|---|---|---|---|")
        for label in ("S", "M", "L"):
            for row in group:
                if row.horizon_label != label:
                    continue
                mcr = "nan" if np.isnan(row.mcr) else f"{100.0 * row.mcr:.1f}"
                iw = "nan" if np.isnan(row.iw) else f"{row.iw:.4g}"
                lines.append(
                    f"| {label} | {row.estimator} | {_fmt3(row.mase)} | {mcr} "
                    f"| {iw} | {_fmt3(row.msiw)} | {row.n_units} | {row.failures} |"
                )
        lines.append("")
    return "\n".join(lines) + "\n"


# --- SVG helpers --------------------------------------------------------------

_PALETTE = [
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
]

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 30, 44, 56


def _px(value: float) -> str:
    return f"{value:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + i * (hi - lo) / (n - 1) for i in range(n)]


class _Svg:
    def __init__(self, width: int = _W, height: int = _H):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
        ]

    def add(self, element: str) -> None:
        self.parts.append(element)

    def text(self, x: float, y: float, content: str, size: int = 12, anchor: str = "start", fill: str = "#333333") -> None:
        self.add(
            f'<text x="{_px(x)}" y="{_px(y)}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}" fill="{fill}">{content}</text>'
        )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _axes(svg: _Svg, x_lo, x_hi, y_lo, y_hi, x_label, y_label, x_percent=False):
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def sx(v: float) -> float:
        return _ML + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * plot_h

    svg.add(
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#999999"/>'
    )
    for t in _ticks(x_lo, x_hi):
        x = sx(t)
        svg.add(
            f'<line x1="{_px(x)}" y1="{_H - _MB}" x2="{_px(x)}" '
            f'y2="{_H - _MB + 5}" stroke="#999999"/>'
        )
        label = f"{100 * t:.1f}" if x_percent else f"{t:.3g}"
        svg.text(x, _H - _MB + 18, label, size=11, anchor="middle")
    for t in _ticks(y_lo, y_hi):
        y = sy(t)
        svg.add(
            f'<line x1="{_ML - 5}" y1="{_px(y)}" x2="{_ML}" '
            f'y2="{_px(y)}" stroke="#999999"/>'
        )
        svg.text(_ML - 8, y + 4, f"{t:.3g}", size=11, anchor="end")
    svg.text((_ML + _W - _MR) / 2, _H - 12, x_label, anchor="middle")
    svg.add(
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.2f}" font-family="sans-serif" '
        f'font-size="12" text-anchor="middle" fill="#333333" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.2f})">{y_label}</text>'
    )
    return sx, sy


def render_bubble_chart(rows: Sequence[ResultRow], alpha: float, title: str) -> str:
    """Coverage/width scatter: one bubble per estimator, radius scaled by MASE.

    The dashed vertical line marks the target coverage 1 - alpha; estimators
    to its right met the target.
    """
    target = 1.0 - alpha
    plotted = [r for r in rows if not (np.isnan(r.mcr) or np.isnan(r.msiw))]
    xs = [r.mcr for r in plotted] + [target]
    ys = [r.msiw for r in plotted] + [0.0]
    x_lo, x_hi = min(xs) - 0.03, min(1.02, max(xs) + 0.03)
    if x_hi - x_lo < 0.1:
        x_lo, x_hi = x_lo - 0.05, x_hi + 0.05
    y_hi = max(ys) * 1.15 if max(ys) > 0 else 1.0
    y_lo = 0.0

    svg = _Svg()
    svg.text(_W / 2, 24, title, size=14, anchor="middle")
    sx, sy = _axes(svg, x_lo, x_hi, y_lo, y_hi, "MCR (%)", "MSIW", x_percent=True)

    tx = sx(target)
    svg.add(
        f'<line x1="{_px(tx)}" y1="{_MT}" x2="{_px(tx)}" y2="{_H - _MB}" '
        'stroke="#555555" stroke-dasharray="6,4"/>'
    )
    svg.text(tx, _MT - 6, f"target {100 * target:.0f}%", size=11, anchor="middle")

    max_mase = max((r.mase for r in plotted if not np.isnan(r.mase)), default=1.0)
    if max_mase <= 0:
        max_mase = 1.0
    for i, row in enumerate(plotted):
        radius = 0.0 if np.isnan(row.mase) else 22.0 * row.mase / max_mase
        color = _PALETTE[i % len(_PALETTE)]
        cx, cy = sx(row.mcr), sy(row.msiw)
        svg.add(
            f'<circle cx="{_px(cx)}" cy="{_px(cy)}" r="{_px(radius)}" '
            f'fill="{color}" fill-opacity="0.45" stroke="{color}"/>'
        )
        svg.text(cx + radius + 4, cy + 4, row.estimator, size=11)
    return svg.render()


def render_series_plot(
    series: TimeSeries,
    interval: PredictionInterval | None,
    actuals,
    tail_points: int | None = None,
) -> str:
    """Context tail, prediction band and holdout points colored by coverage."""
    actuals = np.asarray(actuals, dtype=np.float64)
    h = actuals.size
    tail = min(len(series), tail_points or max(3 * h, 48))
    context = series.values[len(series) - tail :]

    ys = [context]
    if h and interval is not None:
        ys += [interval.lower, interval.upper, actuals]
    stacked = np.concatenate(ys)
    y_lo, y_hi = float(stacked.min()), float(stacked.max())
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.07 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    n_total = tail + h
    svg = _Svg()
    svg.text(_W / 2, 24, series.id, size=14, anchor="middle")
    sx, sy = _axes(svg, 0.0, float(max(n_total - 1, 1)), y_lo, y_hi, "step", "value")

    def polyline(xs, vals, stroke, width=1.5, dash=""):
        pts = " ".join(f"{_px(sx(x))},{_px(sy(v))}" for x, v in zip(xs, vals))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        svg.add(
            f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width}"{extra}/>'
        )

    if h and interval is not None:
        xs_h = list(range(tail, n_total))
        band = " ".join(
            f"{_px(sx(x))},{_px(sy(v))}" for x, v in zip(xs_h, interval.upper)
        )
        band += " " + " ".join(
            f"{_px(sx(x))},{_px(sy(v))}"
            for x, v in zip(reversed(xs_h), interval.lower[::-1])
        )
        svg.add(f'<polygon points="{band}" fill="#add8e6" fill-opacity="0.45"/>')
        polyline(xs_h, interval.upper, "#87b8d4")
        polyline(xs_h, interval.lower, "#87b8d4")
        polyline(xs_h, interval.center.point, "#1f77b4", dash="4,3")

    polyline(range(tail), context, "#333333")

    if h and interval is not None:
        for x, value, lo, hi in zip(
            range(tail, n_total), actuals, interval.lower, interval.upper
        ):
            covered = lo <= value <= hi
            color = "#111111" if covered else "#d62728"
            svg.add(
                f'<circle cx="{_px(sx(x))}" cy="{_px(sy(value))}" r="2.5" '
                f'fill="{color}"/>'
            )
    return svg.render()
