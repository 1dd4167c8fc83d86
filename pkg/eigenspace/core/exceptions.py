from pathlib import Path
from typing import Optional, Sequence, Tuple, Union


class EigenspaceError(Exception):
    """Base class for every error raised by the eigenspace package"""


class ShapeMismatchError(EigenspaceError, ValueError):
    def __init__(self, message: str, *shapes: Tuple[int, ...]):
        super().__init__(message)
        self.shapes = shapes


class NonSymmetricMatrixError(EigenspaceError, ValueError):
    pass


class ConvergenceError(EigenspaceError, ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class InvalidParameterError(EigenspaceError, ValueError):
    pass


class ScatterTooLargeError(InvalidParameterError):
    pass


class DegenerateScatterError(EigenspaceError, ValueError):
    pass


class PGMFormatError(EigenspaceError, ValueError):
    pass


class PGMMagicError(PGMFormatError):
    pass


class PGMHeaderError(PGMFormatError):
    pass


class PGMMaxvalError(PGMFormatError):
    pass


class PGMTruncatedError(PGMFormatError):
    pass


class DatasetLayoutError(EigenspaceError, FileNotFoundError):
    def __init__(self, message: str, paths: Optional[Sequence[Union[str, Path]]] = None):
        self.paths = [Path(p) for p in (paths or [])]
        if self.paths:
            listed = ", ".join(str(p) for p in self.paths)
            message = f"{message}: {listed}"
        super().__init__(message)

    def __str__(self) -> str:
        return self.args[0]


class ExperimentError(EigenspaceError):
    pass
