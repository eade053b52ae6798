"""
Custom exceptions for mlleak.

All exceptions inherit from MLLeakError, allowing users to catch
every toolkit error with a single except clause.

Hierarchy:
- Numerical core errors (shapes, non-finite values, optimizer state)
- Data errors (IDX decoding, split sizes, attribute labels)
- Training and capability errors raised by the model zoo and threat layer
- Reporting and I/O errors raised by the experiment runner
"""

from pathlib import Path
from typing import Any


def _restore(cls: type, args: tuple, state: dict[str, Any]) -> "MLLeakError":
    error = cls.__new__(cls, *args)
    error.args = args
    error.__dict__.update(state)
    return error


class MLLeakError(Exception):
    """Base exception for all mlleak errors."""

    def __reduce__(self) -> tuple[Any, ...]:
        # context attributes are keyword-only, so rebuild without __init__
        # when errors cross a worker process boundary
        return (_restore, (type(self), self.args, self.__dict__))


class MLLeakConfigurationError(MLLeakError):
    """Invalid configuration document, profile, or argument value."""

    pass


# Numerical core


class MLLeakDimensionError(MLLeakError):
    """Operand shapes are incompatible."""

    def __init__(
        self,
        message: str,
        *,
        expected: tuple[int, ...] | None = None,
        actual: tuple[int, ...] | None = None,
    ) -> None:
        super().__init__(message)
        self.expected = expected
        self.actual = actual

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}("
            f"message={str(self)!r}, "
            f"expected={self.expected!r}, "
            f"actual={self.actual!r})"
        )


class MLLeakNumericError(MLLeakError):
    """NaN or otherwise invalid floating-point input or result."""

    pass


class MLLeakLabelError(MLLeakError, IndexError):
    """Class label outside [0, num_classes)."""

    pass


class MLLeakOptimizerStateError(MLLeakError):
    """Optimizer called with missing gradients or an invalid step index."""

    pass


# Data


class MLLeakDataError(MLLeakError):
    """Dataset is missing information an operation needs."""

    pass


class MLLeakDataFormatError(MLLeakDataError):
    """Base class for malformed IDX payloads."""

    pass


class MLLeakFormatError(MLLeakDataFormatError):
    """Unexpected magic number or header layout."""

    def __init__(self, message: str, *, magic: int | None = None) -> None:
        super().__init__(message)
        self.magic = magic


class MLLeakLengthError(MLLeakDataFormatError):
    """Payload shorter than its header promises."""

    def __init__(self, message: str, *, expected: int, actual: int) -> None:
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class MLLeakConsistencyError(MLLeakDataFormatError):
    """Image and label files disagree on the sample count."""

    pass


class MLLeakSizeError(MLLeakDataError):
    """Dataset too small (or empty) for the requested operation."""

    pass


class MLLeakDisjointnessError(MLLeakDataError):
    """Two sample sets that must be disjoint share indices."""

    def __init__(self, message: str, *, overlap: int = 0) -> None:
        super().__init__(message)
        self.overlap = overlap


class MLLeakBalanceError(MLLeakDataError):
    """Member and non-member sets cannot be balanced."""

    pass


# Models and threat layer


class MLLeakTrainingError(MLLeakError):
    """Training diverged."""

    def __init__(self, message: str, *, epoch: int) -> None:
        super().__init__(message)
        self.epoch = epoch

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(message={str(self)!r}, epoch={self.epoch})"


class MLLeakCapabilityError(MLLeakError):
    """Operation not permitted by the adversary's access or the architecture."""

    def __init__(self, message: str, *, required: str | None = None) -> None:
        super().__init__(message)
        self.required = required


class MLLeakCheckpointError(MLLeakError):
    """Checkpoint file is corrupt or has an unknown format version."""

    pass


# Evaluation and runner


class MLLeakDegenerateInputError(MLLeakError):
    """Statistic undefined for the input (e.g. zero variance)."""

    pass


class MLLeakInsufficientDataError(MLLeakError):
    """Too few points for a statistic."""

    pass


class MLLeakEmptyInputError(MLLeakError):
    """No inputs were found to process."""

    pass


class MLLeakIOError(MLLeakError):
    """A file could not be read or written."""

    def __init__(self, message: str, *, path: str | Path) -> None:
        super().__init__(message)
        self.path = str(path)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(message={str(self)!r}, path={self.path!r})"
