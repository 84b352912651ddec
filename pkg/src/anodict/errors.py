"""Exception types shared across the library."""


class AnodictError(Exception):
    """Base class for all library-specific errors."""


class ZeroColumnError(AnodictError):
    """A column that must be normalized has (near-)zero norm."""

    def __init__(self, index, message=None):
        self.index = int(index)
        super().__init__(message or f"column {self.index} has near-zero norm")


class IndexOutOfRangeError(AnodictError):
    """A column index falls outside the matrix."""


class EmptySelectionError(AnodictError):
    """A column selection is empty."""


class SingularSubproblemError(AnodictError):
    """A least-squares subproblem stayed singular after jittering."""


class TooFewSignalsError(AnodictError):
    """Not enough training signals for the requested dictionary size."""


class SingularKernelError(AnodictError):
    """A kernel Gram system stayed singular after jitter escalation."""


class DegenerateSplitError(AnodictError):
    """No train/test split with both classes on the test side was found."""


class ParseError(AnodictError):
    """A dataset file could not be parsed."""

    def __init__(self, line, column, message):
        self.line = int(line)
        self.column = int(column)
        super().__init__(f"line {self.line}, column {self.column}: {message}")


class NonBinaryLabelError(AnodictError):
    """A label other than 0 or 1 was encountered."""


class SingleClassError(AnodictError):
    """A metric needs both classes but only one is present."""


class DimensionMismatchError(AnodictError):
    """Signal dimension does not match the fitted model."""


class ConfigError(AnodictError):
    """A benchmark configuration entry is invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
