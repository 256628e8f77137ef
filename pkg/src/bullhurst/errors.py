"""Exception types shared across the package."""


class BullhurstError(Exception):
    """Base class for all package errors."""


class ParseError(BullhurstError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(BullhurstError):
    """Input violates a data invariant (ordering, sign, duplicates)."""


class SchemaError(BullhurstError):
    """Required column or key is missing."""


class InsufficientDataError(BullhurstError):
    """Series too short for the requested operation."""


class EstimationError(BullhurstError):
    """A statistical fit could not be carried out."""


class FitError(EstimationError):
    """Optimizer did not converge; carries the best parameters seen."""

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class ConfigError(BullhurstError):
    """Invalid configuration; carries the source position when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StageError(BullhurstError):
    """Pipeline stage failure, tagged with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
