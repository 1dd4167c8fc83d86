import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from eigenspace.core.exceptions import (
    DegenerateScatterError,
    InvalidParameterError,
    ShapeMismatchError,
)
from eigenspace.models.config import Method, Metric, ModelConfig
from eigenspace.services.linalg import Matrix, as_matrix, gram_eig, stack_pairs, sym_eig
from eigenspace.services.reshape import stack_columns, stacked_shape, unstack_columns, vectorize
from eigenspace.services.scatter import as_image_batch, scatter_e2d

logger = logging.getLogger(__name__)

# Scatter energy below this fraction of the raw image energy counts as zero
DEGENERATE_RATIO = 1e-20


@dataclass(frozen=True, eq=False)
class ProjectionBasis:
    vectors: Matrix
    eigenvalues: np.ndarray
    cfg: ModelConfig
    original_shape: Tuple[int, int]
    mean: Matrix
    total_scatter: float

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    @property
    def feature_shape(self) -> Tuple[int, int]:
        if self.cfg.method == Method.PCA:
            return self.d, 1
        return stacked_shape(self.original_shape, self.cfg.stack_config)[1], self.d

    @property
    def energy_ratio(self) -> float:
        """Share of the training scatter captured by the retained eigenvectors"""
        if self.total_scatter <= 0:
            return 0.0
        return float(np.sum(self.eigenvalues)) / self.total_scatter


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    matrix: Matrix
    label: Optional[int] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    @property
    def coefficient_count(self) -> int:
        return int(self.matrix.size)


@dataclass(frozen=True, eq=False)
class Gallery:
    """Training features stacked once into an N x rows x cols array"""

    features: np.ndarray
    labels: Tuple[Optional[int], ...]

    @classmethod
    def from_features(cls, features: Sequence[FeatureMatrix]) -> "Gallery":
        if not features:
            raise InvalidParameterError("gallery must contain at least one feature matrix")
        shape = features[0].shape
        for k, f in enumerate(features):
            if f.shape != shape:
                raise ShapeMismatchError(f"gallery entry {k} has shape {f.shape}, expected {shape}", f.shape, shape)
        return cls(features=np.stack([f.matrix for f in features]), labels=tuple(f.label for f in features))

    def __len__(self) -> int:
        return len(self.labels)


def _check_degenerate(total_scatter: float, batch: np.ndarray) -> None:
    energy = float(np.mean(np.sum(batch * batch, axis=(1, 2))))
    if energy == 0.0 or total_scatter <= DEGENERATE_RATIO * energy:
        raise DegenerateScatterError(
            f"training scatter is zero (trace {total_scatter:.3e}); "
            f"the {batch.shape[0]} training images are identical"
        )


def train(images: Sequence[npt.ArrayLike], cfg: ModelConfig) -> ProjectionBasis:
    start = time.perf_counter()
    batch = as_image_batch(images)
    count, rows, cols = batch.shape
    mean = batch.mean(axis=0)

    if cfg.method == Method.PCA:
        centered = batch - mean
        samples = centered.transpose(0, 2, 1).reshape(count, rows * cols).T
        total_scatter = float(np.sum(samples * samples)) / count
        _check_degenerate(total_scatter, batch)
        pairs = gram_eig(samples)
        rank = sum(1 for p in pairs if p.value > 0.0)
        if cfg.d > rank and cfg.d <= len(pairs):
            logger.warning(f"PCA d={cfg.d} exceeds the training scatter rank {rank}; trailing axes carry no variance")
    else:
        scatter = scatter_e2d(batch, cfg.stack_config)
        total_scatter = scatter.trace
        _check_degenerate(total_scatter, batch)
        pairs = sym_eig(scatter.matrix)

    if cfg.d > len(pairs):
        raise InvalidParameterError(f"d={cfg.d} exceeds the {len(pairs)}-dimensional eigenproblem of {cfg.label}")
    eigenvalues, vectors = stack_pairs(pairs, cfg.d)

    basis = ProjectionBasis(
        vectors=vectors,
        eigenvalues=eigenvalues,
        cfg=cfg,
        original_shape=(rows, cols),
        mean=mean,
        total_scatter=total_scatter,
    )
    logger.info(
        f"Trained {cfg.label} on {count} images: basis {vectors.shape[0]}x{vectors.shape[1]}, "
        f"energy {basis.energy_ratio:.3f}, {time.perf_counter() - start:.3f}s"
    )
    return basis


def extract(image: npt.ArrayLike, basis: ProjectionBasis, label: Optional[int] = None) -> FeatureMatrix:
    a = as_matrix(image, "image")
    if a.shape != basis.original_shape:
        raise ShapeMismatchError(
            f"image shape {a.shape} does not match the trained shape {basis.original_shape}",
            a.shape,
            basis.original_shape,
        )
    if basis.cfg.method == Method.PCA:
        coefficients = basis.vectors.T @ vectorize(a - basis.mean)
        return FeatureMatrix(matrix=coefficients.reshape(-1, 1), label=label)
    stacked = stack_columns(a, basis.cfg.stack_config)
    return FeatureMatrix(matrix=stacked.T @ basis.vectors, label=label)


def build_gallery(
    images: Sequence[npt.ArrayLike],
    labels: Sequence[Optional[int]],
    basis: ProjectionBasis,
) -> Gallery:
    if len(images) != len(labels):
        raise ShapeMismatchError(f"{len(images)} images but {len(labels)} labels")
    return Gallery.from_features([extract(img, basis, label) for img, label in zip(images, labels)])


def reconstruct(feature: FeatureMatrix, basis: ProjectionBasis) -> Matrix:
    """Map a feature matrix back to image space; exact when d is the full dimension"""
    if feature.shape != basis.feature_shape:
        raise ShapeMismatchError(
            f"feature shape {feature.shape} does not match basis feature shape {basis.feature_shape}",
            feature.shape,
            basis.feature_shape,
        )
    rows, cols = basis.original_shape
    if basis.cfg.method == Method.PCA:
        flat = basis.vectors @ feature.matrix[:, 0]
        return basis.mean + flat.reshape((rows, cols), order="F")
    stacked = basis.vectors @ feature.matrix.T
    return unstack_columns(stacked, rows, cols, basis.cfg.stack_config)


def _distances(probe: Matrix, stacked: np.ndarray, metric: Metric) -> np.ndarray:
    diff = stacked - probe
    squared = diff * diff
    if metric == Metric.COLUMN_SUM_L2:
        return np.sqrt(squared.sum(axis=1)).sum(axis=1)
    if metric == Metric.FROBENIUS:
        return np.sqrt(squared.sum(axis=(1, 2)))
    raise InvalidParameterError(f"unknown metric {metric!r}")


def distance(a: FeatureMatrix, b: FeatureMatrix, metric: Metric = Metric.COLUMN_SUM_L2) -> float:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"feature shapes differ: {a.shape} vs {b.shape}", a.shape, b.shape)
    return float(_distances(a.matrix, b.matrix[np.newaxis], Metric(metric))[0])


def nearest(
    probe: FeatureMatrix,
    gallery: Union[Gallery, Sequence[FeatureMatrix]],
    metric: Metric = Metric.COLUMN_SUM_L2,
) -> Tuple[int, float]:
    """Index and distance of the closest gallery entry; the lowest index wins ties"""
    if not isinstance(gallery, Gallery):
        gallery = Gallery.from_features(list(gallery))
    if probe.shape != gallery.features.shape[1:]:
        raise ShapeMismatchError(
            f"probe shape {probe.shape} does not match gallery shape {gallery.features.shape[1:]}",
            probe.shape,
            gallery.features.shape[1:],
        )
    distances = _distances(probe.matrix, gallery.features, Metric(metric))
    index = int(np.argmin(distances))
    return index, float(distances[index])


def classify(
    probe: FeatureMatrix,
    gallery: Union[Gallery, Sequence[FeatureMatrix]],
    metric: Metric = Metric.COLUMN_SUM_L2,
) -> Optional[int]:
    if not isinstance(gallery, Gallery):
        gallery = Gallery.from_features(list(gallery))
    index, _ = nearest(probe, gallery, metric)
    return gallery.labels[index]


def save_basis(basis: ProjectionBasis, path: Union[str, Path]) -> None:
    with open(path, "wb") as fh:
        np.savez(
            fh,
            config=np.array(basis.cfg.model_dump_json()),
            original_shape=np.array(basis.original_shape, dtype=np.int64),
            eigenvalues=basis.eigenvalues,
            vectors=np.ascontiguousarray(basis.vectors),
            mean=np.ascontiguousarray(basis.mean),
            total_scatter=np.array(basis.total_scatter, dtype=np.float64),
        )
    logger.info(f"Saved {basis.cfg.label} basis to {path}")


def load_basis(path: Union[str, Path]) -> ProjectionBasis:
    with np.load(path, allow_pickle=False) as data:
        cfg = ModelConfig.model_validate_json(data["config"].item())
        return ProjectionBasis(
            vectors=data["vectors"],
            eigenvalues=data["eigenvalues"],
            cfg=cfg,
            original_shape=tuple(int(v) for v in data["original_shape"]),
            mean=data["mean"],
            total_scatter=float(data["total_scatter"]),
        )
