"""Exception types shared across the package."""


class FairnormError(Exception):
    """Base class for every error raised by fairnorm."""


class ShapeError(FairnormError, ValueError):
    """Array dimensions do not line up."""


class DomainError(FairnormError, ValueError):
    """Input values outside an operation's domain."""


class StateError(FairnormError, RuntimeError):
    """Operation called out of order, e.g. backward before forward."""


class UndefinedMetricError(FairnormError, ValueError):
    """Metric has no defined value on this input, e.g. an empty subgroup."""


class ConfigError(FairnormError, ValueError):
    """Bad configuration file, flag value, or flag combination."""


class DataError(FairnormError, ValueError):
    """Problem reading or interpreting a data file."""


class ParseError(DataError):
    """Malformed row in an input file."""


class SchemaError(DataError):
    """Input data does not match the expected schema."""


class CheckpointError(DataError):
    """Checkpoint file is missing, corrupt, or incompatible."""
