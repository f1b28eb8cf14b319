"""Exception hierarchy.

Two families: :class:`ValidationError` for bad inputs or configuration
(CLI exit code 1) and :class:`NumericalError` for failures during the
numerics themselves (CLI exit code 2).
"""


class WhiskyspecError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(WhiskyspecError, ValueError):
    pass


class NumericalError(WhiskyspecError, ArithmeticError):
    pass


class InvalidArgument(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ShapeError(ValidationError):
    pass


class InsufficientClassData(ValidationError):
    pass


class StratificationError(ValidationError):
    pass


class InvalidArchitecture(ValidationError):
    pass


class HeadNotPresent(ValidationError):
    pass


class SchemaVersionError(ValidationError):
    pass


class DegenerateColumn(NumericalError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"column {index} has zero variance")


class DegenerateComponent(NumericalError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"latent variable {index}: X'y vanished")


class DegenerateSlope(NumericalError):
    pass


class DegenerateTarget(NumericalError):
    pass


class NumericalFailure(NumericalError):
    def __init__(self, message, layer=None):
        self.layer = layer
        if layer is not None:
            message = f"{message} (layer {layer})"
        super().__init__(message)


class TrainingDiverged(NumericalError):
    def __init__(self, epoch):
        self.epoch = epoch
        super().__init__(f"training diverged at epoch {epoch}")
