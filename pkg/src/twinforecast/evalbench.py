"""Accuracy metrics, rolling-origin evaluation and latency benchmarking.

CV-RMSE and NMBE are both normalized by the mean actual value and reported
in percent; positive NMBE means over-prediction.  Pooled figures use one
global mean over every (origin, step) pair, and the per-origin distribution
is retained alongside so either aggregation can be inspected.
"""

import csv
import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone as dt_timezone
from pathlib import Path

import numpy as np

from .errors import LengthMismatchError, SegmentTooShortError, ZeroMeanError
from .series import HOUR

EVAL_SCHEMA = 1
CV_RMSE_CRITERION = 20.0
NMBE_CRITERION = 5.0
UNSTABLE_MEAN_THRESHOLD = 0.5


def _validate(actual, predicted):
    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if actual.shape != predicted.shape or actual.ndim != 1:
        raise LengthMismatchError(
            f"actual {actual.shape} and predicted {predicted.shape} must be "
            "1-D and equal length"
        )
    if actual.size < 1:
        raise LengthMismatchError("metrics need at least one sample")
    mean = actual.mean()
    if mean == 0.0:
        raise ZeroMeanError("mean actual value is zero; metric undefined")
    return actual, predicted, mean


def cv_rmse(actual, predicted):
    """Root-mean-square error over the mean actual value, in percent."""
    actual, predicted, mean = _validate(actual, predicted)
    rmse = np.sqrt(np.mean((predicted - actual) ** 2))
    return float(100.0 * rmse / mean)


def nmbe(actual, predicted):
    """Mean bias over the mean actual value, in percent."""
    actual, predicted, mean = _validate(actual, predicted)
    return float(100.0 * np.mean(predicted - actual) / mean)


@dataclass
class EvalReport:
    model_tag: str
    target_name: str
    unit: str
    split: str
    lookback: int
    horizon: int
    stride: int
    n_origins: int
    pooled_cv_rmse: float
    pooled_nmbe: float
    mean_origin_cv_rmse: float
    mean_origin_nmbe: float
    per_origin_cv_rmse: list
    per_origin_nmbe: list
    origin_epochs: list
    passes_cv_rmse: bool
    passes_nmbe: bool
    passes_criteria: bool
    mean_actual: float
    unstable_mean: bool
    # raw series kept for CSV export; not part of the JSON document
    actuals: np.ndarray = field(default=None, repr=False)
    predictions: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {
            "eval_schema": EVAL_SCHEMA,
            "model": self.model_tag,
            "target": self.target_name,
            "unit": self.unit,
            "split": self.split,
            "lookback": self.lookback,
            "horizon": self.horizon,
            "stride": self.stride,
            "n_origins": self.n_origins,
            "pooled_cv_rmse_pct": self.pooled_cv_rmse,
            "pooled_nmbe_pct": self.pooled_nmbe,
            "mean_origin_cv_rmse_pct": self.mean_origin_cv_rmse,
            "mean_origin_nmbe_pct": self.mean_origin_nmbe,
            "per_origin_cv_rmse_pct": self.per_origin_cv_rmse,
            "per_origin_nmbe_pct": self.per_origin_nmbe,
            "origin_epochs": self.origin_epochs,
            "criteria": {
                "cv_rmse_max_pct": CV_RMSE_CRITERION,
                "nmbe_abs_max_pct": NMBE_CRITERION,
                "passes_cv_rmse": self.passes_cv_rmse,
                "passes_nmbe": self.passes_nmbe,
                "passes": self.passes_criteria,
            },
            "mean_actual": self.mean_actual,
            "unstable_mean": self.unstable_mean,
        }


def rolling_evaluate(model, bundle, split="test", stride=1, chunk=128):
    """Forecast every origin of the split and pool the errors.

    ``stride`` subsamples the dataset's origins.  Per-origin metrics use
    each window's own mean actual (the horizon-local reading of the metric
    definitions); pooled metrics use the global mean.
    """
    ds = bundle.splits[split]
    if len(ds) == 0:
        raise SegmentTooShortError(f"split {split!r} has no complete window")
    take = np.arange(0, len(ds), stride)

    preds = np.empty((len(take), ds.horizon), dtype=np.float64)
    for lo in range(0, len(take), chunk):
        idx = take[lo : lo + chunk]
        preds[lo : lo + len(idx)] = model.predict_batch(
            ds.past_target[idx],
            ds.past_covariates[idx],
            ds.future_covariates[idx],
            ds.past_target_physical[idx],
        )
    actuals = ds.future_target_physical[take].astype(np.float64)

    pooled_actual = actuals.reshape(-1)
    pooled_pred = preds.reshape(-1)
    pooled_cv = cv_rmse(pooled_actual, pooled_pred)
    pooled_bias = nmbe(pooled_actual, pooled_pred)

    means = actuals.mean(axis=1)
    rmses = np.sqrt(np.mean((preds - actuals) ** 2, axis=1))
    biases = np.mean(preds - actuals, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        origin_cv = np.where(means != 0.0, 100.0 * rmses / means, np.nan)
        origin_bias = np.where(means != 0.0, 100.0 * biases / means, np.nan)

    mean_actual = float(pooled_actual.mean())
    passes_cv = pooled_cv <= CV_RMSE_CRITERION
    passes_bias = abs(pooled_bias) <= NMBE_CRITERION
    return EvalReport(
        model_tag=model.tag,
        target_name=bundle.target_name,
        unit=bundle.unit,
        split=split,
        lookback=ds.lookback,
        horizon=ds.horizon,
        stride=stride,
        n_origins=len(take),
        pooled_cv_rmse=pooled_cv,
        pooled_nmbe=pooled_bias,
        mean_origin_cv_rmse=float(np.nanmean(origin_cv)),
        mean_origin_nmbe=float(np.nanmean(origin_bias)),
        per_origin_cv_rmse=[float(x) for x in origin_cv],
        per_origin_nmbe=[float(x) for x in origin_bias],
        origin_epochs=[
            int(bundle.start + int(ds.origins[i]) * HOUR) for i in take
        ],
        passes_cv_rmse=bool(passes_cv),
        passes_nmbe=bool(passes_bias),
        passes_criteria=bool(passes_cv and passes_bias),
        mean_actual=mean_actual,
        unstable_mean=bool(abs(mean_actual) < UNSTABLE_MEAN_THRESHOLD),
        actuals=actuals,
        predictions=preds,
    )


@dataclass
class LatencyStats:
    mean_ms: float
    std_ms: float
    runs: int
    warmup: int
    hardware: str

    def to_dict(self):
        return {
            "mean_ms": self.mean_ms,
            "std_ms": self.std_ms,
            "runs": self.runs,
            "warmup": self.warmup,
            "hardware": self.hardware,
        }


def bench_inference(model, sample, runs=100, warmup=10, hardware=""):
    """Wall-clock single-window predict latency; warmup runs are discarded."""
    if runs < 30:
        raise ValueError(f"need at least 30 timed runs for stable stats, got {runs}")
    for _ in range(warmup):
        model.predict(sample)
    timings = np.empty(runs, dtype=np.float64)
    for i in range(runs):
        started = time.perf_counter()
        model.predict(sample)
        timings[i] = (time.perf_counter() - started) * 1000.0
    return LatencyStats(
        mean_ms=float(timings.mean()),
        std_ms=float(timings.std(ddof=1)),
        runs=runs,
        warmup=warmup,
        hardware=hardware,
    )


def export_report(report, json_path, csv_path=None, latency=None):
    """Write the insight JSON (and optionally the plot-ready CSV).

    CSV columns are timestamp, actual, predicted with horizon rows per
    origin, chronological within each origin.
    """
    document = {"eval_schema": EVAL_SCHEMA, "report": report.to_dict()}
    if latency is not None:
        document["latency"] = latency.to_dict()
    Path(json_path).write_text(
        json.dumps(document, indent=2, sort_keys=True), encoding="utf-8"
    )
    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["timestamp", "actual", "predicted"])
            for row, epoch in enumerate(report.origin_epochs):
                for step in range(report.horizon):
                    stamp = datetime.fromtimestamp(
                        epoch + step * HOUR, dt_timezone.utc
                    )
                    writer.writerow(
                        [
                            stamp.isoformat(),
                            repr(float(report.actuals[row, step])),
                            repr(float(report.predictions[row, step])),
                        ]
                    )
    return document
