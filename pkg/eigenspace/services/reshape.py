"""Column stacking: turn an m x n image into an (r*m) x ceil(n/r) matrix.

Stacked column j is the vertical concatenation of image columns
r*j, r*j+1, ..., r*j+r-1 (zero-based), after zero columns are appended so
that r divides the column count. Reading the result down its columns gives
the same sequence as reading the padded image down its columns, so r=1 is
the identity and r=n is the column-concatenation vector used by PCA.
The row direction is the same construction applied to the transposed image.
"""
import math
from typing import Tuple

import numpy as np
import numpy.typing as npt

from eigenspace.core.exceptions import InvalidParameterError, ShapeMismatchError
from eigenspace.models.config import Direction, StackConfig
from eigenspace.services.linalg import Matrix, as_matrix


def _oriented(a: Matrix, direction: Direction) -> Matrix:
    return a.T if direction == Direction.ROW else a


def pad_columns(a: npt.ArrayLike, r: int) -> Matrix:
    if r < 1:
        raise InvalidParameterError(f"stacking radius must be >= 1, got {r}")
    a = as_matrix(a, "image")
    missing = r * math.ceil(a.shape[1] / r) - a.shape[1]
    if missing == 0:
        return a
    return np.pad(a, ((0, 0), (0, missing)), mode="constant", constant_values=0.0)


def stacked_shape(shape: Tuple[int, int], cfg: StackConfig) -> Tuple[int, int]:
    rows, cols = shape if cfg.direction == Direction.COLUMN else shape[::-1]
    if cfg.r > cols:
        raise InvalidParameterError(
            f"r={cfg.r} exceeds the {cols} {'columns' if cfg.direction == Direction.COLUMN else 'rows'} "
            f"of a {shape[0]}x{shape[1]} image"
        )
    return cfg.r * rows, math.ceil(cols / cfg.r)


def stack_columns(a: npt.ArrayLike, cfg: StackConfig) -> Matrix:
    a = as_matrix(a, "image")
    out_shape = stacked_shape(a.shape, cfg)
    padded = pad_columns(_oriented(a, cfg.direction), cfg.r)
    return padded.reshape(out_shape, order="F")


def unstack_columns(b: npt.ArrayLike, original_rows: int, original_cols: int, cfg: StackConfig) -> Matrix:
    b = as_matrix(b, "stacked image")
    expected = stacked_shape((original_rows, original_cols), cfg)
    if b.shape != expected:
        raise ShapeMismatchError(
            f"stacked shape {b.shape} does not come from a {original_rows}x{original_cols} image "
            f"with r={cfg.r} ({cfg.direction.value}); expected {expected}",
            b.shape,
            expected,
        )
    rows, cols = (
        (original_rows, original_cols) if cfg.direction == Direction.COLUMN else (original_cols, original_rows)
    )
    padded = b.reshape((rows, expected[1] * cfg.r), order="F")
    return np.ascontiguousarray(_oriented(padded[:, :cols], cfg.direction))


def vectorize(a: npt.ArrayLike) -> np.ndarray:
    """Concatenate the image columns into one vector"""
    return as_matrix(a, "image").reshape(-1, order="F")
