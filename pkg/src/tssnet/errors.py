"""Exception hierarchy shared by every tssnet module."""


class TssNetError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatch(TssNetError, ValueError):
    pass


class InvalidShape(TssNetError, ValueError):
    pass


class OutOfBounds(TssNetError, IndexError):
    pass


class InvalidConfig(TssNetError, ValueError):
    pass


class KernelTooLarge(InvalidConfig):
    pass


class StaleCache(TssNetError, ValueError):
    pass


class EmptyInput(TssNetError, ValueError):
    pass


class TooShort(TssNetError, ValueError):
    pass


class DegenerateSample(TssNetError, ValueError):
    pass


class AllDegenerate(DegenerateSample):
    pass


class NonFiniteLoss(TssNetError, FloatingPointError):
    pass


class IoError(TssNetError, OSError):
    pass


class EmptyFile(TssNetError, ValueError):
    pass


class ParseError(TssNetError, ValueError):
    """Non-numeric or malformed cell; ``row`` and ``col`` are 1-based file positions."""

    def __init__(self, row, col, message=""):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, column {col}: {message}" if message else f"row {row}, column {col}")


class VersionMismatch(TssNetError, ValueError):
    pass


class CorruptCheckpoint(TssNetError, ValueError):
    pass


class AllTrialsFailed(TssNetError, RuntimeError):
    pass
