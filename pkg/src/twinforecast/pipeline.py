"""Assembly of model-ready datasets from canonical hourly series.

The bundle fixes the covariate manifest, fits scalers on the training slice
only, and slices each split into windows.  Future covariates are the actual
observed values over the horizon; deployment would substitute forecasts for
the weather block, which is an operational caveat, not a property of this
pipeline.
"""

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone as dt_timezone
from pathlib import Path

import numpy as np

from .errors import ShapeMismatchError
from .features import (
    MinMaxScaler,
    WindowedDataset,
    build_windows,
    calendar_features,
    encode_cyclical,
)
from .series import HOUR, SplitSpec, split_boundaries
from .weather import WEATHER_VARIABLES

SCALED_COVARIATES = (
    "dryBulbTemperature",
    "relativeHumidity",
    "dewPointTemperature",
    "precipitation",
    "windSpeed",
    "globalIrradiance",
)

COVARIATE_NAMES = SCALED_COVARIATES + (
    "windDirectionSin",
    "windDirectionCos",
    "hourSin",
    "hourCos",
    "weekdaySin",
    "weekdayCos",
    "isWeekend",
    "isHoliday",
)

SPLIT_NAMES = ("train", "valid", "test")


def manifest_fingerprint(target_name, unit, lookback, horizon, manifest):
    doc = json.dumps(
        {
            "target": target_name,
            "unit": unit,
            "lookback": lookback,
            "horizon": horizon,
            "covariates": list(manifest),
        },
        sort_keys=True,
    )
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()


@dataclass
class WindowSample:
    """One inference window in the model's input space."""

    past_target: np.ndarray
    past_covariates: np.ndarray
    future_covariates: np.ndarray
    past_target_physical: np.ndarray
    manifest_hash: str
    origin_epoch: int = 0


@dataclass
class DatasetBundle:
    target_name: str
    unit: str
    timezone: str
    start: int
    lookback: int
    horizon: int
    stride: int
    manifest: list
    target_scaler: MinMaxScaler
    covariate_scalers: dict
    splits: dict
    split_bounds: tuple
    degenerate: list

    @property
    def manifest_hash(self):
        return manifest_fingerprint(
            self.target_name, self.unit, self.lookback, self.horizon, self.manifest
        )

    def sample(self, split, index):
        ds = self.splits[split]
        return WindowSample(
            past_target=ds.past_target[index],
            past_covariates=ds.past_covariates[index],
            future_covariates=ds.future_covariates[index],
            past_target_physical=ds.past_target_physical[index],
            manifest_hash=self.manifest_hash,
            origin_epoch=self.start + int(ds.origins[index]) * HOUR,
        )

    def origin_timestamps(self, split):
        ds = self.splits[split]
        return [
            datetime.fromtimestamp(self.start + int(o) * HOUR, dt_timezone.utc)
            for o in ds.origins
        ]

    def save(self, path):
        path = Path(path)
        arrays = {}
        for name, ds in self.splits.items():
            arrays[f"{name}_past_target"] = ds.past_target
            arrays[f"{name}_past_covariates"] = ds.past_covariates
            arrays[f"{name}_future_covariates"] = ds.future_covariates
            arrays[f"{name}_future_target"] = ds.future_target
            arrays[f"{name}_past_target_physical"] = ds.past_target_physical
            arrays[f"{name}_future_target_physical"] = ds.future_target_physical
            arrays[f"{name}_origins"] = ds.origins
        np.savez_compressed(path.with_suffix(".npz"), **arrays)
        meta = {
            "target_name": self.target_name,
            "unit": self.unit,
            "timezone": self.timezone,
            "start": self.start,
            "lookback": self.lookback,
            "horizon": self.horizon,
            "stride": self.stride,
            "manifest": list(self.manifest),
            "manifest_hash": self.manifest_hash,
            "target_scaler": self.target_scaler.to_dict(),
            "covariate_scalers": {
                k: v.to_dict() for k, v in self.covariate_scalers.items()
            },
            "split_bounds": list(self.split_bounds),
            "degenerate": list(self.degenerate),
        }
        path.with_suffix(".json").write_text(
            json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8"
        )

    @classmethod
    def load(cls, path):
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
        data = np.load(path.with_suffix(".npz"))
        splits = {}
        for name in SPLIT_NAMES:
            splits[name] = WindowedDataset(
                lookback=meta["lookback"],
                horizon=meta["horizon"],
                past_target=data[f"{name}_past_target"],
                past_covariates=data[f"{name}_past_covariates"],
                future_covariates=data[f"{name}_future_covariates"],
                future_target=data[f"{name}_future_target"],
                past_target_physical=data[f"{name}_past_target_physical"],
                future_target_physical=data[f"{name}_future_target_physical"],
                origins=data[f"{name}_origins"],
                manifest=list(meta["manifest"]),
            )
        return cls(
            target_name=meta["target_name"],
            unit=meta["unit"],
            timezone=meta["timezone"],
            start=meta["start"],
            lookback=meta["lookback"],
            horizon=meta["horizon"],
            stride=meta["stride"],
            manifest=list(meta["manifest"]),
            target_scaler=MinMaxScaler.from_dict(meta["target_scaler"]),
            covariate_scalers={
                k: MinMaxScaler.from_dict(v)
                for k, v in meta["covariate_scalers"].items()
            },
            splits=splits,
            split_bounds=tuple(meta["split_bounds"]),
            degenerate=list(meta["degenerate"]),
        )


def build_dataset(
    target,
    weather,
    holidays,
    split=None,
    lookback=168,
    horizon=24,
    stride=1,
):
    """Assemble a DatasetBundle from one target series plus weather series.

    ``target`` is a RegularSeries; ``weather`` maps the seven canonical
    variable names to RegularSeries aligned with it.
    """
    split = split or SplitSpec()
    n = len(target)
    for name in WEATHER_VARIABLES:
        if name not in weather:
            raise ShapeMismatchError(f"weather series {name!r} is missing")
        w = weather[name]
        if len(w) != n or w.start != target.start:
            raise ShapeMismatchError(
                f"weather series {name!r} is not aligned with the target "
                f"(len {len(w)} vs {n}, start {w.start} vs {target.start})"
            )

    timestamps = target.timestamps()
    cal = calendar_features(timestamps, target.timezone, holidays)
    hour_sin, hour_cos = encode_cyclical(cal[:, 2], 24.0)
    wd_sin, wd_cos = encode_cyclical(cal[:, 3], 7.0)
    dir_sin, dir_cos = encode_cyclical(weather["windDirection"].values, 360.0)

    i1, i2 = split_boundaries(n, split)

    degenerate = []
    target_scaler = MinMaxScaler().fit(target.values[:i1])
    if target_scaler.degenerate:
        degenerate.append("target")
    covariate_scalers = {}
    columns = []
    for name in SCALED_COVARIATES:
        scaler = MinMaxScaler().fit(weather[name].values[:i1])
        if scaler.degenerate:
            degenerate.append(name)
        covariate_scalers[name] = scaler
        columns.append(scaler.transform(weather[name].values))
    columns.extend(
        [dir_sin, dir_cos, hour_sin, hour_cos, wd_sin, wd_cos, cal[:, 1], cal[:, 0]]
    )
    covariates = np.stack(columns, axis=1).astype(np.float32)
    target_scaled = target_scaler.transform(target.values).astype(np.float32)
    target_physical = target.values.astype(np.float64)

    splits = {}
    for name, (lo, hi) in zip(SPLIT_NAMES, ((0, i1), (i1, i2), (i2, n))):
        splits[name] = build_windows(
            target_scaled[lo:hi],
            target_physical[lo:hi],
            covariates[lo:hi],
            lookback,
            horizon,
            stride,
            COVARIATE_NAMES,
            offset=lo,
        )
    return DatasetBundle(
        target_name=target.series_id,
        unit=target.unit,
        timezone=target.timezone,
        start=target.start,
        lookback=lookback,
        horizon=horizon,
        stride=stride,
        manifest=list(COVARIATE_NAMES),
        target_scaler=target_scaler,
        covariate_scalers=covariate_scalers,
        splits=splits,
        split_bounds=(i1, i2, n),
        degenerate=degenerate,
    )
