"""Raw observation ingest, cleaning, hourly resampling and splitting.

Timestamps live internally as UTC epoch seconds; hour-bucket boundaries are
computed in each series' declared local timezone.  The canonical analytic
representation is the hourly, gap-free ``RegularSeries``.
"""

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone as dt_timezone

import numpy as np

from .errors import (
    BoundaryGapError,
    EmptySeriesError,
    GapTooLongError,
    ParseError,
    TooShortError,
)
from .features import _zone

HOUR = 3600

UNITS = ("°C", "%RH", "ppm", "lux", "relative", "m")

DEFAULT_BOUNDS = {
    "°C": (-40.0, 60.0),
    "%RH": (0.0, 100.0),
    "ppm": (300.0, 10000.0),
    "lux": (0.0, 200000.0),
    "relative": (0.0, 1e9),
    "m": (-50.0, 50.0),
}


@dataclass
class ValidityBounds:
    min: float
    max: float

    def __post_init__(self):
        if not self.min < self.max:
            raise ValueError(f"bounds require min < max, got [{self.min}, {self.max}]")

    @classmethod
    def for_unit(cls, unit):
        lo, hi = DEFAULT_BOUNDS[unit]
        return cls(lo, hi)


@dataclass
class SplitSpec:
    train_fraction: float = 0.8
    valid_fraction: float = 0.1
    test_fraction: float = 0.1

    def __post_init__(self):
        fractions = (self.train_fraction, self.valid_fraction, self.test_fraction)
        if any(f <= 0 for f in fractions):
            raise ValueError("split fractions must all be positive")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fractions)}")


@dataclass
class RawSeries:
    series_id: str
    unit: str
    timestamps: np.ndarray  # int64 UTC epoch seconds, strictly increasing
    values: np.ndarray
    timezone: str = "UTC"

    def __len__(self):
        return len(self.timestamps)


@dataclass
class IngestReport:
    series_id: str
    rows_read: int
    rows_kept: int
    duplicates_dropped: int


@dataclass
class MaskedHourly:
    """Hourly bucket means with a missing-hour mask (pre gap-filling)."""

    series_id: str
    unit: str
    start: int  # epoch seconds of first local-hour bucket
    values: np.ndarray
    missing: np.ndarray
    timezone: str


@dataclass
class RegularSeries:
    series_id: str
    unit: str
    start: int  # epoch seconds, aligned to a local-hour boundary
    values: np.ndarray
    timezone: str = "UTC"
    step: int = field(default=HOUR)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.values) < 1:
            raise EmptySeriesError(f"series {self.series_id} is empty")

    def __len__(self):
        return len(self.values)

    def timestamps(self):
        return [
            datetime.fromtimestamp(self.start + i * self.step, dt_timezone.utc)
            for i in range(len(self.values))
        ]

    def epoch_at(self, index):
        return self.start + index * self.step


def parse_timestamp(text, tz):
    """ISO 8601 to UTC epoch seconds; naive stamps take the given zone."""
    dt = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=tz)
    return int(dt.timestamp())


def ingest_csv(source, column_map=None, timezone="UTC", series_id=None, unit="°C"):
    """Parse a ``timestamp,value`` CSV into a sorted, deduplicated RawSeries.

    ``source`` is a path or a text stream.  Duplicate timestamps keep the
    last value in file order; the drop count lands in the report.  Raises
    ParseError carrying the physical line number of the first bad row.
    """
    column_map = column_map or {}
    ts_col = column_map.get("timestamp", "timestamp")
    val_col = column_map.get("value", "value")
    tz = _zone(timezone)

    if hasattr(source, "read"):
        stream = source
        name = series_id or "stream"
    else:
        with open(source, "r", encoding="utf-8") as fh:
            stream = io.StringIO(fh.read())
        name = series_id or str(source)

    reader = csv.DictReader(stream)
    if reader.fieldnames is None or ts_col not in reader.fieldnames or val_col not in reader.fieldnames:
        raise ParseError(f"missing required columns {ts_col!r}, {val_col!r}", line=1)

    stamps = []
    values = []
    rows_read = 0
    for row in reader:
        rows_read += 1
        line = reader.line_num
        try:
            stamps.append(parse_timestamp(row[ts_col], tz))
            values.append(float(row[val_col]))
        except (ValueError, TypeError, AttributeError) as exc:
            raise ParseError(f"bad row: {exc}", line=line) from exc

    stamps = np.asarray(stamps, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(stamps, kind="stable")
    stamps, values = stamps[order], values[order]
    # last-writer-wins on duplicate timestamps
    if len(stamps):
        keep = np.r_[stamps[1:] != stamps[:-1], True]
    else:
        keep = np.zeros(0, dtype=bool)
    dropped = int((~keep).sum())
    series = RawSeries(
        series_id=name,
        unit=unit,
        timestamps=stamps[keep],
        values=values[keep],
        timezone=timezone,
    )
    assert np.all(np.diff(series.timestamps) > 0), "non-monotonic after dedupe"
    return series, IngestReport(name, rows_read, len(series), dropped)


def drop_invalid(series, bounds):
    """Remove readings outside [min, max]; returns (filtered, removed count)."""
    ok = (series.values >= bounds.min) & (series.values <= bounds.max)
    filtered = RawSeries(
        series_id=series.series_id,
        unit=series.unit,
        timestamps=series.timestamps[ok],
        values=series.values[ok],
        timezone=series.timezone,
    )
    return filtered, int((~ok).sum())


def _local_hour_floor(epochs, timezone):
    """Epoch seconds of the local-hour bucket containing each timestamp."""
    tz = _zone(timezone)
    out = np.empty(len(epochs), dtype=np.int64)
    for i, e in enumerate(epochs):
        local = datetime.fromtimestamp(int(e), tz)
        floored = local.replace(minute=0, second=0, microsecond=0)
        out[i] = int(floored.timestamp())
    return out


def resample_hourly_mean(series):
    """Average observations into local-hour buckets [h, h+1).

    Hours inside the span with no observations are flagged missing for the
    gap-filling stage.
    """
    if len(series) == 0:
        raise EmptySeriesError(f"series {series.series_id} has no observations")
    keys = _local_hour_floor(series.timestamps, series.timezone)
    start = int(keys[0])
    idx = (keys - start) // HOUR
    n = int(idx[-1]) + 1
    sums = np.bincount(idx, weights=series.values, minlength=n)
    counts = np.bincount(idx, minlength=n)
    missing = counts == 0
    values = np.zeros(n, dtype=np.float64)
    np.divide(sums, counts, out=values, where=~missing)
    return MaskedHourly(
        series_id=series.series_id,
        unit=series.unit,
        start=start,
        values=values,
        missing=missing,
        timezone=series.timezone,
    )


def fill_gaps_linear(masked, max_gap=6):
    """Fill missing runs of <= max_gap hours by linear interpolation.

    The first and last hours must be present; longer runs abort rather than
    fabricate data.
    """
    missing = masked.missing
    if missing[0] or missing[-1]:
        raise BoundaryGapError(
            f"series {masked.series_id} is missing a boundary hour"
        )
    values = masked.values.copy()
    n = len(values)
    i = 0
    while i < n:
        if not missing[i]:
            i += 1
            continue
        j = i
        while missing[j]:
            j += 1
        run = j - i
        if run > max_gap:
            raise GapTooLongError(run, max_gap)
        lo, hi = values[i - 1], values[j]
        for k in range(run):
            values[i + k] = lo + (hi - lo) * (k + 1) / (run + 1)
        i = j
    return RegularSeries(
        series_id=masked.series_id,
        unit=masked.unit,
        start=masked.start,
        values=values,
        timezone=masked.timezone,
    )


def split_boundaries(n, spec):
    i1 = int(np.floor(spec.train_fraction * n + 1e-9))
    i2 = int(np.floor((spec.train_fraction + spec.valid_fraction) * n + 1e-9))
    return i1, i2


def split_chronological(series, spec):
    """Chronological, contiguous train/valid/test partition (floor rule)."""
    n = len(series)
    if n < 3:
        raise TooShortError(f"cannot split a series of length {n} three ways")
    i1, i2 = split_boundaries(n, spec)
    if i1 < 1 or i2 <= i1 or i2 >= n:
        raise TooShortError(
            f"length {n} with fractions "
            f"{spec.train_fraction}:{spec.valid_fraction}:{spec.test_fraction} "
            "leaves an empty segment"
        )
    parts = []
    for lo, hi in ((0, i1), (i1, i2), (i2, n)):
        parts.append(
            RegularSeries(
                series_id=series.series_id,
                unit=series.unit,
                start=series.start + lo * series.step,
                values=series.values[lo:hi].copy(),
                timezone=series.timezone,
            )
        )
    return tuple(parts)


def write_series_csv(series, path):
    """Persist a RegularSeries in the canonical CSV layout."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "value"])
        for i, v in enumerate(series.values):
            ts = datetime.fromtimestamp(series.epoch_at(i), dt_timezone.utc)
            writer.writerow([ts.isoformat(), repr(float(v))])
