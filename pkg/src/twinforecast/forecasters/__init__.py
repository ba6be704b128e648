"""The five forecasting methods behind one contract, plus the trainer."""

from ..errors import InvalidHyperparameterError
from .base import (
    ForecastTask,
    Forecaster,
    TrainerConfig,
    TrainReport,
    load_forecaster,
    registry_checkpoint_path,
    registry_report_path,
    save_train_report,
)
from .lstm import LSTMForecaster, LSTMHyper
from .nhits import NHiTSForecaster, NHiTSHyper
from .sn24 import SN24Forecaster, sn24_forecast
from .tcn import TCNForecaster, TCNHyper, receptive_field
from .tide import TiDEForecaster, TiDEHyper
from .trainer import evaluate_loss, train

ARCHITECTURES = {
    "SN24": SN24Forecaster,
    "LSTM": LSTMForecaster,
    "TCN": TCNForecaster,
    "NHITS": NHiTSForecaster,
    "TIDE": TiDEForecaster,
}

# Attention-based architectures are out of scope: quadratic cost in the
# lookback length is a poor fit for the edge target this toolkit serves.
EXCLUDED_ARCHITECTURES = {
    "TFT": "attention models are excluded; their cost grows quadratically "
    "with the lookback and does not suit the edge deployment target",
}


def build_model(tag, task, hyper=None, seed=0):
    """Instantiate an untrained forecaster by architecture tag."""
    key = tag.upper()
    if key in EXCLUDED_ARCHITECTURES:
        raise InvalidHyperparameterError(
            f"architecture {tag!r} is not supported: {EXCLUDED_ARCHITECTURES[key]}"
        )
    if key not in ARCHITECTURES:
        raise InvalidHyperparameterError(
            f"unknown architecture {tag!r}; choose from {sorted(ARCHITECTURES)}"
        )
    return ARCHITECTURES[key](task, hyper=hyper, seed=seed)


__all__ = [
    "ARCHITECTURES",
    "EXCLUDED_ARCHITECTURES",
    "ForecastTask",
    "Forecaster",
    "LSTMForecaster",
    "LSTMHyper",
    "NHiTSForecaster",
    "NHiTSHyper",
    "SN24Forecaster",
    "TCNForecaster",
    "TCNHyper",
    "TiDEForecaster",
    "TiDEHyper",
    "TrainerConfig",
    "TrainReport",
    "build_model",
    "evaluate_loss",
    "load_forecaster",
    "receptive_field",
    "registry_checkpoint_path",
    "registry_report_path",
    "save_train_report",
    "sn24_forecast",
    "train",
]
