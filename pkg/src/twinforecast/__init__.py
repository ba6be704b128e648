"""twinforecast: parametric building twins, indoor climate forecasting and
edge evaluation tooling."""

__version__ = "0.1.0"
