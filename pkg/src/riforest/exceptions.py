"""Exception hierarchy shared across the package."""


class RiForestError(Exception):
    """Base class for all package errors."""


class ParameterError(RiForestError, ValueError):
    """A hyperparameter violates its allowed range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DataError(RiForestError, ValueError):
    """Input data is malformed: wrong shape, non-finite cells, bad labels."""


class ModelFormatError(DataError):
    """A serialized model document failed version or structural validation."""


class DegenerateSparsityError(RiForestError):
    """Random projection kept producing all-zero vectors."""


class NoValleySplitError(RiForestError):
    """No threshold leaves mass on both sides of the histogram."""
