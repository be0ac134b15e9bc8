"""Dataset ingestion, window sampling and synthetic generators.

The canonical on-disk format is long CSV (header ``series_id,timestamp,value``,
RFC 3339 timestamps). Benchmark sources are fetched through a versioned
manifest mapping dataset name to {url, sha256, frequency}; downloads are
cached and verified by content hash.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import urllib.error
import urllib.request
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from .domain import Frequency, HorizonSpec, TimeSeries
from .errors import (
    ConfigError,
    DownloadFailed,
    HashMismatch,
    MissingValue,
    NonUniformSpacing,
    ParseError,
    ScenarioDoesNotFit,
)

__all__ = [
    "DatasetSpec",
    "BUILTIN_DATASETS",
    "WindowScenario",
    "load_long_csv",
    "write_long_csv",
    "load_manifest",
    "default_manifest_path",
    "fetch_dataset",
    "cache_dir",
    "sample_windows",
    "synth_iid",
    "synth_seasonal",
]

CACHE_ENV_VAR = "CONFORMAL_TS_CACHE_DIR"


@dataclass(frozen=True)
class DatasetSpec:
    """Expected shape of a named benchmark dataset."""

    name: str
    frequency: Frequency
    expected_series: int
    expected_length: int

    def check(self, series_list: list[TimeSeries]) -> None:
        if len(series_list) != self.expected_series:
            raise ConfigError(
                f"{self.name}: expected {self.expected_series} series, "
                f"got {len(series_list)}"
            )
        for s in series_list:
            if len(s) != self.expected_length:
                raise ConfigError(
                    f"{self.name}: series {s.id!r} has {len(s)} points, "
                    f"expected {self.expected_length}"
                )
            if s.frequency is not self.frequency:
                raise ConfigError(
                    f"{self.name}: series {s.id!r} is {s.frequency.code}, "
                    f"expected {self.frequency.code}"
                )


BUILTIN_DATASETS = {
    "ercot": DatasetSpec("ercot", Frequency.HOURLY, 1, 17520),
    "nn5_daily": DatasetSpec("nn5_daily", Frequency.DAILY, 100, 791),
    "nn5_weekly": DatasetSpec("nn5_weekly", Frequency.WEEKLY, 100, 105),
    "m3_monthly": DatasetSpec("m3_monthly", Frequency.MONTHLY, 1428, 66),
}


@dataclass(frozen=True)
class WindowScenario:
    """Sampling of fixed-length windows (plus holdout) from one series."""

    window_points: int
    horizon: HorizonSpec
    n_windows: int = 20
    seed: int = 0
    placement: str = "even"

    def __post_init__(self):
        if self.window_points < 1:
            raise ConfigError("window_points must be positive")
        if self.n_windows < 1:
            raise ConfigError("n_windows must be positive")
        if self.placement not in ("even", "random"):
            raise ConfigError(f"unknown placement {self.placement!r}")

    @property
    def span(self) -> int:
        return self.window_points + self.horizon.steps


# --- long CSV ---------------------------------------------------------------

_HEADER = ["series_id", "timestamp", "value"]


def _format_timestamp(ts: datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_timestamp(text: str) -> datetime:
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts


def _infer_frequency(first: datetime, second: datetime) -> Frequency | None:
    for freq in (Frequency.HOURLY, Frequency.DAILY, Frequency.WEEKLY, Frequency.MONTHLY):
        if freq.shift(first, 1) == second:
            return freq
    return None


def load_long_csv(path, frequency: Frequency | None = None) -> list[TimeSeries]:
    """Load one TimeSeries per id from a long CSV file.

    Rows are sorted by timestamp within each id. Spacing is verified against
    ``frequency`` (inferred per series from the first gap when omitted);
    NaN/missing values are rejected, not imputed.
    """
    rows: dict[str, list[tuple[datetime, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, "empty file") from None
        if [h.strip() for h in header] != _HEADER:
            raise ParseError(1, f"expected header {','.join(_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(line_no, f"expected 3 columns, got {len(row)}")
            series_id, ts_text, value_text = row
            try:
                ts = _parse_timestamp(ts_text)
            except ValueError:
                raise ParseError(line_no, f"bad timestamp {ts_text!r}") from None
            bucket = rows.setdefault(series_id, [])
            if value_text.strip() == "":
                raise MissingValue(series_id, len(bucket))
            try:
                value = float(value_text)
            except ValueError:
                raise ParseError(line_no, f"bad value {value_text!r}") from None
            if not np.isfinite(value):
                raise MissingValue(series_id, len(bucket))
            bucket.append((ts, value))

    out: list[TimeSeries] = []
    for series_id, pairs in rows.items():
        pairs.sort(key=lambda p: p[0])
        start = pairs[0][0]
        freq = frequency
        if freq is None:
            if len(pairs) < 2:
                raise ConfigError(
                    f"series {series_id!r} has a single row; pass an explicit frequency"
                )
            freq = _infer_frequency(start, pairs[1][0])
            if freq is None:
                raise NonUniformSpacing(series_id, 1)
        for i, (ts, _) in enumerate(pairs):
            if ts != freq.shift(start, i):
                raise NonUniformSpacing(series_id, i)
        out.append(
            TimeSeries(
                id=series_id,
                start=start,
                frequency=freq,
                values=np.array([v for _, v in pairs]),
            )
        )
    return out


def write_long_csv(path, series_list: list[TimeSeries]) -> None:
    """Write series in long CSV form; float formatting round-trips bitwise."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_HEADER)
        for series in series_list:
            for i, value in enumerate(series.values):
                writer.writerow(
                    [series.id, _format_timestamp(series.timestamp_at(i)), repr(float(value))]
                )


# --- manifest + fetch ---------------------------------------------------------


def default_manifest_path() -> Path:
    return Path(str(resources.files("conformal_ts").joinpath("data/manifest.json")))


def load_manifest(path=None) -> dict:
    manifest_path = Path(path) if path is not None else default_manifest_path()
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {manifest_path}: {exc}") from exc
    if not isinstance(manifest, dict) or "datasets" not in manifest:
        raise ConfigError(f"manifest {manifest_path} lacks a 'datasets' table")
    return manifest["datasets"]


def cache_dir(explicit=None) -> Path:
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "conformal-ts"


def _sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def fetch_dataset(
    name: str,
    url: str | None = None,
    cache: os.PathLike | str | None = None,
    sha256: str | None = None,
    manifest_path=None,
) -> Path:
    """Download a dataset once, verify its content hash, and cache it.

    ``url``/``sha256`` default to the manifest entry for ``name``. A warm
    cache hit performs no network I/O; a cached file failing verification
    raises instead of being silently replaced.
    """
    if url is None or sha256 is None:
        entries = load_manifest(manifest_path)
        entry = entries.get(name)
        if entry is None:
            raise ConfigError(f"unknown dataset {name!r} and no url given")
        url = url or entry.get("url")
        sha256 = sha256 or entry.get("sha256")
        if not url:
            raise ConfigError(
                f"manifest entry for {name!r} has no url; pin one first "
                "(see the manifest notes)"
            )

    directory = cache_dir(cache)
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / f"{name}.csv"

    if target.exists():
        if sha256 and _sha256_of(target) != sha256:
            raise HashMismatch(f"cached {target} does not match pinned hash")
        return target

    tmp = target.with_suffix(".part")
    try:
        with urllib.request.urlopen(url) as resp, open(tmp, "wb") as out:
            while True:
                chunk = resp.read(1 << 20)
                if not chunk:
                    break
                out.write(chunk)
    except (urllib.error.URLError, OSError) as exc:
        tmp.unlink(missing_ok=True)
        raise DownloadFailed(f"download of {name!r} from {url} failed: {exc}") from exc

    if sha256 and _sha256_of(tmp) != sha256:
        tmp.unlink(missing_ok=True)
        raise HashMismatch(f"download of {name!r} does not match pinned hash")
    tmp.replace(target)
    return target


# --- window sampling ----------------------------------------------------------


def sample_windows(
    series: TimeSeries, scenario: WindowScenario
) -> list[tuple[TimeSeries, np.ndarray]]:
    """Cut (window, holdout) pairs out of one series.

    Placement is deterministic: ``even`` spreads the start offsets uniformly
    over the admissible range, ``random`` draws them under the scenario seed.
    The holdout is the ``horizon.steps`` points immediately after each window.
    """
    n = len(series)
    span = scenario.span
    if span > n:
        raise ScenarioDoesNotFit(
            f"window of {scenario.window_points}+{scenario.horizon.steps} points "
            f"does not fit a series of {n}"
        )
    limit = n - span
    k = scenario.n_windows
    if scenario.placement == "even":
        if k == 1:
            starts = [0]
        else:
            starts = [int(np.floor(i * limit / (k - 1) + 0.5)) for i in range(k)]
    else:
        rng = np.random.default_rng(scenario.seed)
        starts = sorted(int(s) for s in rng.integers(0, limit + 1, size=k))

    out = []
    for idx, begin in enumerate(starts):
        window = series.slice(begin, begin + scenario.window_points, f"/w{idx:03d}")
        holdout = series.values[begin + scenario.window_points : begin + span]
        out.append((window, holdout))
    return out


# --- synthetic generators -------------------------------------------------------

_SYNTH_START = datetime(2020, 1, 1)


def synth_iid(
    n: int,
    mean: float = 0.0,
    sigma: float = 1.0,
    seed: int = 0,
    series_id: str | None = None,
    frequency: Frequency = Frequency.HOURLY,
) -> TimeSeries:
    """I.i.d. Gaussian series around a constant mean, reproducible by seed."""
    if n < 1:
        raise ValueError("n must be positive")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    values = mean + sigma * rng.standard_normal(n)
    return TimeSeries(
        id=series_id or f"iid-{seed}",
        start=_SYNTH_START,
        frequency=frequency,
        values=values,
    )


def synth_seasonal(
    n: int,
    m: int,
    amplitude: float = 1.0,
    noise: float = 0.0,
    seed: int = 0,
    mean: float = 0.0,
    series_id: str | None = None,
    frequency: Frequency = Frequency.HOURLY,
) -> TimeSeries:
    """Sinusoidal series of exact period ``m`` plus optional Gaussian noise.

    With zero noise consecutive periods repeat bitwise (the base pattern is
    tiled, not re-evaluated).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if m < 1:
        raise ValueError("m must be positive")
    if noise < 0:
        raise ValueError("noise must be nonnegative")
    pattern = mean + amplitude * np.sin(2.0 * np.pi * np.arange(m) / m)
    values = np.tile(pattern, n // m + 1)[:n]
    if noise > 0:
        rng = np.random.default_rng(seed)
        values = values + noise * rng.standard_normal(n)
    return TimeSeries(
        id=series_id or f"seasonal-{m}-{seed}",
        start=_SYNTH_START,
        frequency=frequency,
        values=values,
    )
