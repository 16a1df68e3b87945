"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class ConfigurationError(ValueError):
    """A component was configured with inconsistent settings."""


class ContractError(ValueError):
    """A precondition of an operation was violated."""


class DataLoadError(ValueError):
    """A dataset file is missing or malformed."""


class SplitError(ValueError):
    """A series is too short for the requested split and windowing."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""
