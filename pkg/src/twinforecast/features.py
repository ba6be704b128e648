"""Calendar features, cyclical encodings, min-max scaling and windowing."""

import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

import numpy as np

from .errors import (
    NonpositivePeriodError,
    SegmentTooShortError,
    UnknownTimezoneError,
)


def parse_holidays(text):
    """Parse a holiday calendar: one ISO date per line, ``#`` comments allowed."""
    days = set()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            days.add(date.fromisoformat(line))
    return days


def load_holidays(path):
    return parse_holidays(Path(path).read_text(encoding="utf-8"))


def _zone(timezone):
    try:
        return ZoneInfo(timezone)
    except (ZoneInfoNotFoundError, ValueError) as exc:
        raise UnknownTimezoneError(f"unknown timezone {timezone!r}") from exc


def calendar_features(timestamps, timezone, holidays):
    """Per-timestamp calendar features, computed in the given local timezone.

    Returns an (N, 4) int array with columns [is_holiday, is_weekend, hour,
    weekday]; weekday is 0 for Monday.
    """
    tz = _zone(timezone)
    out = np.empty((len(timestamps), 4), dtype=np.int64)
    for i, ts in enumerate(timestamps):
        local = ts.astimezone(tz)
        weekday = local.weekday()
        out[i, 0] = 1 if local.date() in holidays else 0
        out[i, 1] = 1 if weekday >= 5 else 0
        out[i, 2] = local.hour
        out[i, 3] = weekday
    return out


def encode_cyclical(value, period):
    """Map a value with the given period onto the unit circle."""
    if period <= 0:
        raise NonpositivePeriodError(f"period must be positive, got {period}")
    angle = 2.0 * math.pi * np.asarray(value, dtype=np.float64) / period
    return np.sin(angle), np.cos(angle)


@dataclass
class MinMaxScaler:
    """Affine map sending the training min/max to [0, 1].

    A constant training series degenerates the range; in that case transform
    maps everything to 0, inverse returns the constant, and ``degenerate``
    is flagged so reports can surface it.
    """

    min: float = 0.0
    max: float = 1.0
    fitted: bool = False
    degenerate: bool = False

    def fit(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            raise ValueError("cannot fit scaler on empty data")
        self.min = float(values.min())
        self.max = float(values.max())
        self.degenerate = self.max == self.min
        self.fitted = True
        return self

    def transform(self, values):
        values = np.asarray(values, dtype=np.float64)
        if self.degenerate:
            return np.zeros_like(values)
        return (values - self.min) / (self.max - self.min)

    def inverse(self, values):
        values = np.asarray(values, dtype=np.float64)
        if self.degenerate:
            return np.full_like(values, self.min)
        return values * (self.max - self.min) + self.min

    def to_dict(self):
        return {
            "min": self.min,
            "max": self.max,
            "fitted": self.fitted,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            min=d["min"], max=d["max"], fitted=d["fitted"], degenerate=d["degenerate"]
        )


@dataclass
class WindowedDataset:
    """Aligned training samples with L-step history and H-step horizon.

    ``past_target``/``future_target`` hold the scaled series the models see;
    the ``*_physical`` twins keep the original units for the seasonal-naive
    baseline and for metric computation.
    """

    lookback: int
    horizon: int
    past_target: np.ndarray        # (S, L)
    past_covariates: np.ndarray    # (S, L, C)
    future_covariates: np.ndarray  # (S, H, C)
    future_target: np.ndarray      # (S, H) scaled
    past_target_physical: np.ndarray
    future_target_physical: np.ndarray
    origins: np.ndarray            # index of the first forecast step per sample
    manifest: list = field(default_factory=list)

    def __len__(self):
        return self.past_target.shape[0]


def window_count(segment_len, lookback, horizon, stride):
    if segment_len < lookback + horizon:
        raise SegmentTooShortError(
            f"segment of {segment_len} cannot fit lookback {lookback} + horizon {horizon}"
        )
    return (segment_len - lookback - horizon) // stride + 1


def build_windows(
    target_scaled,
    target_physical,
    covariates,
    lookback,
    horizon,
    stride,
    manifest,
    offset=0,
):
    """Slice one contiguous segment into windowed samples.

    ``offset`` is the segment's start index in the full series, kept so each
    sample's forecast origin can be mapped back to a timestamp.
    """
    n = window_count(len(target_scaled), lookback, horizon, stride)
    starts = np.arange(n) * stride
    sw_t = np.lib.stride_tricks.sliding_window_view(target_scaled, lookback + horizon)
    sw_p = np.lib.stride_tricks.sliding_window_view(target_physical, lookback + horizon)
    sw_c = np.lib.stride_tricks.sliding_window_view(
        covariates, (lookback + horizon, covariates.shape[1])
    )[:, 0]
    win_t = sw_t[starts]
    win_p = sw_p[starts]
    win_c = sw_c[starts]
    return WindowedDataset(
        lookback=lookback,
        horizon=horizon,
        past_target=np.ascontiguousarray(win_t[:, :lookback]),
        past_covariates=np.ascontiguousarray(win_c[:, :lookback, :]),
        future_covariates=np.ascontiguousarray(win_c[:, lookback:, :]),
        future_target=np.ascontiguousarray(win_t[:, lookback:]),
        past_target_physical=np.ascontiguousarray(win_p[:, :lookback]),
        future_target_physical=np.ascontiguousarray(win_p[:, lookback:]),
        origins=starts + offset + lookback,
        manifest=list(manifest),
    )
