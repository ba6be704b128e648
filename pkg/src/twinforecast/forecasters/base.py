"""Uniform forecaster contract shared by the baseline and the four nets."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..autodiff import Tensor, no_grad
from ..autodiff.checkpoint import read_checkpoint, write_checkpoint
from ..errors import (
    InvalidHyperparameterError,
    ManifestMismatchError,
    NotTrainedError,
)
from ..features import MinMaxScaler
from ..pipeline import COVARIATE_NAMES, manifest_fingerprint

LOOKBACK = 168
HORIZON = 24


@dataclass
class ForecastTask:
    target_name: str
    unit: str
    lookback: int = LOOKBACK
    horizon: int = HORIZON
    manifest: list = field(default_factory=lambda: list(COVARIATE_NAMES))

    @property
    def manifest_hash(self):
        return manifest_fingerprint(
            self.target_name, self.unit, self.lookback, self.horizon, self.manifest
        )

    @property
    def n_covariates(self):
        return len(self.manifest)

    @classmethod
    def from_bundle(cls, bundle):
        return cls(
            target_name=bundle.target_name,
            unit=bundle.unit,
            lookback=bundle.lookback,
            horizon=bundle.horizon,
            manifest=list(bundle.manifest),
        )


@dataclass
class TrainerConfig:
    max_epochs: int = 100
    patience: int = 30
    batch_size: int = 32
    seed: int = 0
    learning_rate: float = 1e-3

    def __post_init__(self):
        if self.patience >= self.max_epochs:
            raise InvalidHyperparameterError(
                f"patience {self.patience} must be < max epochs {self.max_epochs}"
            )
        if self.batch_size < 1:
            raise InvalidHyperparameterError("batch size must be >= 1")


@dataclass
class TrainReport:
    epochs_run: int
    best_epoch: int
    train_curve: list
    valid_curve: list
    wall_time_s: float

    def to_dict(self):
        return {
            "epochs_run": self.epochs_run,
            "best_epoch": self.best_epoch,
            "train_curve": [float(x) for x in self.train_curve],
            "valid_curve": [float(x) for x in self.valid_curve],
            "wall_time_s": self.wall_time_s,
        }


class Forecaster:
    """Train/predict/save contract. Subclasses set ``tag`` and implement
    ``_forward_batch`` over scaled inputs; the baseline overrides
    ``predict_batch`` wholesale."""

    tag = None

    def __init__(self, task, hyper=None, seed=0):
        self.task = task
        self.hyper = hyper
        self.seed = seed
        self.trained = False
        self.target_scaler = MinMaxScaler(0.0, 1.0, fitted=True)

    # --- inference -------------------------------------------------------

    def parameters(self):
        return []

    def named_parameters(self):
        return []

    def _forward_batch(self, past_target, past_cov, future_cov, training):
        raise NotImplementedError

    def predict_batch(self, past_target, past_cov, future_cov, past_physical):
        """Scaled window batch -> physical-unit forecasts (S, H)."""
        if not self.trained:
            raise NotTrainedError(f"{self.tag} model has not been trained")
        with no_grad():
            out = self._forward_batch(
                Tensor(np.asarray(past_target, dtype=np.float32)),
                Tensor(np.asarray(past_cov, dtype=np.float32)),
                Tensor(np.asarray(future_cov, dtype=np.float32)),
                training=False,
            )
        return self.target_scaler.inverse(out.data.astype(np.float64))

    def predict(self, sample):
        """One WindowSample -> vector of H physical-unit forecasts."""
        if sample.manifest_hash != self.task.manifest_hash:
            raise ManifestMismatchError(
                "window sample was built with a different feature manifest"
            )
        return self.predict_batch(
            sample.past_target[None, :],
            sample.past_covariates[None, :, :],
            sample.future_covariates[None, :, :],
            sample.past_target_physical[None, :],
        )[0]

    # --- persistence ------------------------------------------------------

    def hyper_dict(self):
        return dict(vars(self.hyper)) if self.hyper is not None else {}

    def save(self, path):
        if not self.trained:
            raise NotTrainedError("refusing to checkpoint an untrained model")
        tensors = {name: p.data for name, p in self.named_parameters()}
        sidecar = {
            "arch": self.tag,
            "hyper": self.hyper_dict(),
            "seed": self.seed,
            "task": {
                "target_name": self.task.target_name,
                "unit": self.task.unit,
                "lookback": self.task.lookback,
                "horizon": self.task.horizon,
                "manifest": list(self.task.manifest),
            },
            "manifest_hash": self.task.manifest_hash,
            "target_scaler": self.target_scaler.to_dict(),
        }
        return write_checkpoint(path, tensors, sidecar)


def load_forecaster(path):
    """Rebuild any architecture from its checkpoint + sidecar."""
    from . import build_model  # late import; registry lives in the package root

    tensors, sidecar = read_checkpoint(path)
    task = ForecastTask(
        target_name=sidecar["task"]["target_name"],
        unit=sidecar["task"]["unit"],
        lookback=sidecar["task"]["lookback"],
        horizon=sidecar["task"]["horizon"],
        manifest=list(sidecar["task"]["manifest"]),
    )
    if sidecar["manifest_hash"] != task.manifest_hash:
        raise ManifestMismatchError(
            "sidecar manifest hash does not match its own manifest"
        )
    model = build_model(
        sidecar["arch"], task, hyper=sidecar["hyper"], seed=sidecar.get("seed", 0)
    )
    params = dict(model.named_parameters())
    if set(params) != set(tensors):
        raise ManifestMismatchError(
            "checkpoint parameter names do not match the architecture"
        )
    for name, arr in tensors.items():
        if params[name].data.shape != arr.shape:
            raise ManifestMismatchError(
                f"parameter {name} has shape {arr.shape}, expected "
                f"{params[name].data.shape}"
            )
        params[name].data = arr.astype(np.float32)
    model.target_scaler = MinMaxScaler.from_dict(sidecar["target_scaler"])
    model.trained = True
    return model


def registry_checkpoint_path(registry_dir, target_name, arch):
    safe = target_name.replace("/", "_")
    return Path(registry_dir) / f"{safe}__{arch.lower()}.tfwt"


def registry_report_path(checkpoint_path):
    return Path(str(checkpoint_path).replace(".tfwt", ".train.json"))


def save_train_report(path, report):
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )
