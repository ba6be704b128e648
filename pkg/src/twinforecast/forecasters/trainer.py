"""Mini-batch MSE training with early stopping on validation loss."""

import time

import numpy as np

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover - dependency is declared
    from contextlib import nullcontext as threadpool_limits

from ..autodiff import Tensor, no_grad, reduce_mean, sub
from ..autodiff.optim import Adam
from ..errors import EmptyDatasetError, ManifestMismatchError, NonFiniteLossError, NonFiniteValueError
from .base import TrainerConfig, TrainReport


def _mse(pred, target):
    diff = sub(pred, target)
    return reduce_mean(diff * diff)


def _forward_loss(model, ds, idx, training):
    pt = Tensor(ds.past_target[idx])
    pc = Tensor(ds.past_covariates[idx])
    fc = Tensor(ds.future_covariates[idx])
    pred = model._forward_batch(pt, pc, fc, training=training)
    return _mse(pred, Tensor(ds.future_target[idx]))


def evaluate_loss(model, ds, chunk=256):
    """Mean squared error over a windowed dataset, in scaled units."""
    total = 0.0
    with no_grad():
        for lo in range(0, len(ds), chunk):
            idx = np.arange(lo, min(lo + chunk, len(ds)))
            loss = _forward_loss(model, ds, idx, training=False)
            total += float(loss.data) * len(idx)
    return total / len(ds)


def train(model, train_ds, valid_ds, config=None):
    """Fit the model, restoring the best-validation parameters.

    Runs at most ``max_epochs`` epochs and stops once the validation loss
    has not improved for ``patience`` consecutive epochs.  Deterministic for
    a fixed config seed.
    """
    config = config or TrainerConfig()
    if len(train_ds) == 0 or len(valid_ds) == 0:
        raise EmptyDatasetError("training and validation sets must be non-empty")
    if train_ds.manifest != model.task.manifest or valid_ds.manifest != model.task.manifest:
        raise ManifestMismatchError("dataset manifest does not match the model task")

    params = model.parameters()
    optimizer = Adam(params, lr=config.learning_rate)
    shuffler = np.random.Generator(np.random.Philox(key=[config.seed, 0x7261]))

    best_val = np.inf
    best_epoch = 0
    best_state = [p.data.copy() for p in params]
    train_curve = []
    valid_curve = []
    started = time.perf_counter()

    # Small per-step GEMMs lose badly to BLAS thread spin-up; pin to one.
    with threadpool_limits(limits=1):
        epoch = 0
        for epoch in range(1, config.max_epochs + 1):
            order = shuffler.permutation(len(train_ds))
            epoch_loss = 0.0
            for lo in range(0, len(order), config.batch_size):
                idx = order[lo : lo + config.batch_size]
                optimizer.zero_grad()
                try:
                    loss = _forward_loss(model, train_ds, idx, training=True)
                except NonFiniteValueError as exc:
                    raise NonFiniteLossError(
                        f"{model.tag}: non-finite forward at epoch {epoch}: {exc}"
                    ) from exc
                value = float(loss.data)
                if not np.isfinite(value):
                    raise NonFiniteLossError(
                        f"{model.tag}: loss became {value} at epoch {epoch}"
                    )
                loss.backward()
                optimizer.step()
                epoch_loss += value * len(idx)
            train_curve.append(epoch_loss / len(train_ds))

            val = evaluate_loss(model, valid_ds)
            valid_curve.append(val)
            if val < best_val:
                best_val = val
                best_epoch = epoch
                best_state = [p.data.copy() for p in params]
            if epoch - best_epoch >= config.patience:
                break

    for p, data in zip(params, best_state):
        p.data = data
    model.trained = True
    return TrainReport(
        epochs_run=epoch,
        best_epoch=best_epoch,
        train_curve=train_curve,
        valid_curve=valid_curve,
        wall_time_s=time.perf_counter() - started,
    )
