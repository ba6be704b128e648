"""Exception types shared across the toolkit."""


class TwinForecastError(Exception):
    """Base class for all toolkit errors."""


# --- twin graph ---------------------------------------------------------


class DuplicateIdError(TwinForecastError):
    pass


class InvalidClassError(TwinForecastError):
    pass


class UnknownEntityError(TwinForecastError):
    pass


class CycleDetectedError(TwinForecastError):
    pass


class PredicateClassMismatchError(TwinForecastError):
    pass


class NotASensorError(TwinForecastError):
    pass


class DuplicateBindingError(TwinForecastError):
    pass


class ParseError(TwinForecastError):
    """Malformed document or row; carries the offending location."""

    def __init__(self, message, line=None, position=None):
        self.line = line
        self.position = position
        where = ""
        if line is not None:
            where = f" (line {line})"
        elif position is not None:
            where = f" (position {position})"
        super().__init__(f"{message}{where}")


class SchemaVersionMismatchError(TwinForecastError):
    pass


# --- series store -------------------------------------------------------


class EmptySeriesError(TwinForecastError):
    pass


class BoundaryGapError(TwinForecastError):
    pass


class GapTooLongError(TwinForecastError):
    def __init__(self, run_length, max_gap):
        self.run_length = run_length
        self.max_gap = max_gap
        super().__init__(f"missing run of {run_length} h exceeds max_gap={max_gap} h")


class TooShortError(TwinForecastError):
    pass


class ConnectorUnreachableError(TwinForecastError):
    pass


class PayloadSchemaError(TwinForecastError):
    pass


# --- feature pipeline ---------------------------------------------------


class UnknownTimezoneError(TwinForecastError):
    pass


class NonpositivePeriodError(TwinForecastError):
    pass


class SegmentTooShortError(TwinForecastError):
    pass


# --- autodiff -----------------------------------------------------------


class ShapeMismatchError(TwinForecastError):
    pass


class NonFiniteValueError(TwinForecastError):
    pass


class NotScalarLossError(TwinForecastError):
    pass


# --- forecasters --------------------------------------------------------


class InvalidHyperparameterError(TwinForecastError):
    pass


class HistoryTooShortError(TwinForecastError):
    pass


class EmptyDatasetError(TwinForecastError):
    pass


class NonFiniteLossError(TwinForecastError):
    pass


class NotTrainedError(TwinForecastError):
    pass


class ManifestMismatchError(TwinForecastError):
    pass


class ChecksumMismatchError(TwinForecastError):
    pass


class VersionMismatchError(TwinForecastError):
    pass


# --- evaluation ---------------------------------------------------------


class ZeroMeanError(TwinForecastError):
    pass


class LengthMismatchError(TwinForecastError):
    pass


# --- synthetic data -----------------------------------------------------


class InvalidScenarioError(TwinForecastError):
    pass
