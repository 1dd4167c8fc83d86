import enum
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import numpy.typing as npt

from eigenspace.core.config import settings
from eigenspace.core.exceptions import (
    InvalidParameterError,
    ScatterTooLargeError,
    ShapeMismatchError,
)
from eigenspace.models.config import Direction, StackConfig
from eigenspace.services.linalg import Matrix, as_matrix
from eigenspace.services.reshape import stack_columns

logger = logging.getLogger(__name__)


class ScatterKind(str, enum.Enum):
    ONE_D = "oneD"
    TWO_D = "twoD"
    E2D = "e2d"


@dataclass(frozen=True, eq=False)
class ScatterMatrix:
    kind: ScatterKind
    matrix: Matrix
    sample_count: int
    r: Optional[int] = None
    direction: Optional[Direction] = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))


def as_image_batch(images: Sequence[npt.ArrayLike]) -> np.ndarray:
    """Stack a nonempty, uniformly shaped image list into an M x m x n array"""
    matrices: List[Matrix] = [as_matrix(img, f"image {k}") for k, img in enumerate(images)]
    if not matrices:
        raise InvalidParameterError("at least one image is required")
    shape = matrices[0].shape
    for k, mat in enumerate(matrices):
        if mat.shape != shape:
            raise ShapeMismatchError(
                f"image {k} has shape {mat.shape}, expected {shape}", mat.shape, shape
            )
    return np.stack(matrices)


def _centered(images: Sequence[npt.ArrayLike]) -> np.ndarray:
    batch = as_image_batch(images)
    return batch - batch.mean(axis=0)


def mean_image(images: Sequence[npt.ArrayLike]) -> Matrix:
    return as_image_batch(images).mean(axis=0)


def _image_covariance(centered: np.ndarray) -> Matrix:
    # (1/M) sum_j C_j C_j^T == H H^T / M with H = [C_1, C_2, ..., C_M]
    count, rows, cols = centered.shape
    wide = centered.transpose(1, 0, 2).reshape(rows, count * cols)
    s = (wide @ wide.T) / count
    return 0.5 * (s + s.T)


def scatter_2d(images: Sequence[npt.ArrayLike]) -> ScatterMatrix:
    centered = _centered(images)
    return ScatterMatrix(
        kind=ScatterKind.TWO_D,
        matrix=_image_covariance(centered),
        sample_count=centered.shape[0],
    )


def scatter_1d(images: Sequence[npt.ArrayLike]) -> ScatterMatrix:
    centered = _centered(images)
    count, rows, cols = centered.shape
    if rows * cols > settings.DIRECT_SCATTER_MAX_DIM:
        raise ScatterTooLargeError(
            f"direct scatter of {rows}x{cols} images needs a {rows * cols}^2 matrix "
            f"(limit {settings.DIRECT_SCATTER_MAX_DIM}); use the snapshot path (gram_eig) instead"
        )
    # row-major flattening of each transposed image is its column concatenation
    vectors = centered.transpose(0, 2, 1).reshape(count, rows * cols)
    s = (vectors.T @ vectors) / count
    return ScatterMatrix(kind=ScatterKind.ONE_D, matrix=0.5 * (s + s.T), sample_count=count)


def block_of_s1d(images: Sequence[npt.ArrayLike], i: int, p: int) -> Matrix:
    """Cross-scatter of image columns i and p (zero-based): block (i, p) of the vectorized scatter"""
    centered = _centered(images)
    count, _, cols = centered.shape
    for name, index in (("i", i), ("p", p)):
        if not 0 <= index < cols:
            raise InvalidParameterError(f"column index {name}={index} outside 0..{cols - 1}")
    return (centered[:, :, i].T @ centered[:, :, p]) / count


def scatter_e2d(images: Sequence[npt.ArrayLike], cfg: StackConfig) -> ScatterMatrix:
    stacked = [stack_columns(img, cfg) for img in as_image_batch(images)]
    centered = _centered(stacked)
    logger.debug(
        f"E2D scatter over {centered.shape[0]} stacked images of shape {centered.shape[1:]} "
        f"(r={cfg.r}, {cfg.direction.value})"
    )
    return ScatterMatrix(
        kind=ScatterKind.E2D,
        matrix=_image_covariance(centered),
        sample_count=centered.shape[0],
        r=cfg.r,
        direction=cfg.direction,
    )
