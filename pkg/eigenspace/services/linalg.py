import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from eigenspace.core.config import settings
from eigenspace.core.exceptions import (
    ConvergenceError,
    InvalidParameterError,
    NonSymmetricMatrixError,
    ShapeMismatchError,
)

logger = logging.getLogger(__name__)

Matrix = npt.NDArray[np.float64]

# Components at or below this magnitude never decide an eigenvector's sign
SIGN_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: float
    vector: npt.NDArray[np.float64]


def as_matrix(a: npt.ArrayLike, name: str = "matrix") -> Matrix:
    """Validate and convert to a finite, non-empty 2-D float64 array"""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatchError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}", arr.shape)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains NaN or Inf entries")
    return arr


def frobenius_norm(a: Matrix) -> float:
    return float(np.linalg.norm(a))


def is_symmetric(s: Matrix, rtol: Optional[float] = None) -> bool:
    rtol = settings.SYMMETRY_RTOL if rtol is None else rtol
    if s.shape[0] != s.shape[1]:
        return False
    return frobenius_norm(s - s.T) <= rtol * max(frobenius_norm(s), np.finfo(np.float64).tiny)


def matmul(a: npt.ArrayLike, b: npt.ArrayLike) -> Matrix:
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}",
            a.shape,
            b.shape,
        )
    return a @ b


def transpose(a: npt.ArrayLike) -> Matrix:
    return np.ascontiguousarray(as_matrix(a).T)


def _jacobi_sweeps(s: Matrix, tol: float, scale: float) -> Tuple[np.ndarray, Matrix]:
    """Cyclic-by-row Jacobi rotations until the off-diagonal mass drops below tol*scale"""
    a = s.copy()
    n = a.shape[0]
    v = np.eye(n)
    threshold = tol * scale

    off = frobenius_norm(a - np.diag(np.diag(a)))
    for sweep in range(settings.JACOBI_MAX_SWEEPS):
        if off <= threshold:
            logger.debug(f"Jacobi converged after {sweep} sweeps (off-diagonal {off:.3e})")
            return np.diag(a).copy(), v

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if apq == 0.0:
                    continue
                theta = (float(a[q, q]) - float(a[p, p])) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s_ = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s_ * col_q
                a[:, q] = s_ * col_p + c * col_q

                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s_ * row_q
                a[q, :] = s_ * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q]
                v[:, p] = c * vec_p - s_ * vec_q
                v[:, q] = s_ * vec_p + c * vec_q

        off = frobenius_norm(a - np.diag(np.diag(a)))
        logger.debug(f"Jacobi sweep {sweep + 1}: off-diagonal {off:.3e}")

    if off <= threshold:
        return np.diag(a).copy(), v
    raise ConvergenceError(
        f"Jacobi eigensolver did not converge in {settings.JACOBI_MAX_SWEEPS} sweeps on a {n}x{n} matrix",
        residual=off,
    )


def _select_solver(n: int) -> str:
    solver = settings.EIGEN_SOLVER.lower()
    if solver == "auto":
        return "jacobi" if n <= settings.JACOBI_MAX_DIM else "lapack"
    if solver not in ("jacobi", "lapack"):
        raise InvalidParameterError(f"unknown eigensolver '{settings.EIGEN_SOLVER}'")
    return solver


def _canonical_sign(vector: np.ndarray) -> np.ndarray:
    significant = np.flatnonzero(np.abs(vector) > SIGN_EPS)
    if significant.size and vector[significant[0]] < 0:
        return -vector
    return vector


def sym_eig(s: npt.ArrayLike, tol: Optional[float] = None) -> List[EigenPair]:
    """Eigenpairs of a symmetric matrix, largest eigenvalue first.

    Equal eigenvalues keep their diagonal order, and every vector's first
    component above 1e-12 in magnitude is positive, so identical input
    always yields identical output.
    """
    tol = settings.EIGEN_TOL if tol is None else tol
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    s = as_matrix(s, "scatter")
    if s.shape[0] != s.shape[1]:
        raise ShapeMismatchError(f"eigendecomposition needs a square matrix, got {s.shape}", s.shape)
    if not is_symmetric(s):
        raise NonSymmetricMatrixError(
            f"matrix of shape {s.shape} is not symmetric within {settings.SYMMETRY_RTOL:g} relative"
        )

    s = 0.5 * (s + s.T)
    n = s.shape[0]
    scale = 1.0 + frobenius_norm(s)
    solver = _select_solver(n)
    logger.debug(f"Solving {n}x{n} symmetric eigenproblem with {solver}")

    if solver == "jacobi":
        values, vectors = _jacobi_sweeps(s, tol, scale)
    else:
        values, vectors = np.linalg.eigh(s)

    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]

    residual = float(np.max(np.linalg.norm(s @ vectors - vectors * values, axis=0)))
    if residual > tol * scale:
        raise ConvergenceError(f"eigenpairs of {n}x{n} matrix exceed the residual bound", residual=residual)

    return [
        EigenPair(value=float(values[k]), vector=_canonical_sign(vectors[:, k].copy()))
        for k in range(n)
    ]


def gram_eig(
    samples: Union[npt.ArrayLike, Sequence[npt.ArrayLike]],
    tol: Optional[float] = None,
) -> List[EigenPair]:
    """Eigenpairs of the scatter (1/M) sum v v^T through its M x M Gram matrix.

    ``samples`` is either a D x M matrix whose columns are the centered samples
    or a sequence of M centered vectors. Returns min(M, D) pairs; pairs with
    a numerically zero eigenvalue get unit vectors completing an orthonormal
    basis of the null space, in standard-basis order.
    """
    tol = settings.EIGEN_TOL if tol is None else tol
    if isinstance(samples, np.ndarray) and samples.ndim == 2:
        x = as_matrix(samples, "samples")
    else:
        vectors = [np.asarray(v, dtype=np.float64).ravel() for v in samples]
        if not vectors:
            raise InvalidParameterError("gram_eig needs at least one sample")
        if len({v.size for v in vectors}) != 1:
            raise ShapeMismatchError("samples have inconsistent lengths", *[v.shape for v in vectors])
        x = as_matrix(np.column_stack(vectors), "samples")

    dim, count = x.shape
    gram = (x.T @ x) / count
    gram = 0.5 * (gram + gram.T)
    gram_pairs = sym_eig(gram, tol)

    rank_threshold = tol * (1.0 + frobenius_norm(gram))
    pairs: List[EigenPair] = []
    for gp in gram_pairs:
        if gp.value <= rank_threshold or len(pairs) == dim:
            break
        lifted = x @ gp.vector
        lifted /= np.linalg.norm(lifted)
        pairs.append(EigenPair(value=gp.value, vector=_canonical_sign(lifted)))

    basis = [p.vector for p in pairs]
    for k in range(dim):
        if len(pairs) == min(count, dim):
            break
        candidate = np.zeros(dim)
        candidate[k] = 1.0
        # two Gram-Schmidt passes keep the completion orthogonal to working precision
        for _ in range(2):
            for b in basis:
                candidate -= (b @ candidate) * b
        norm = np.linalg.norm(candidate)
        if norm > 0.5:
            candidate /= norm
            basis.append(candidate)
            pairs.append(EigenPair(value=0.0, vector=_canonical_sign(candidate)))

    return pairs


def stack_pairs(pairs: Sequence[EigenPair], d: int) -> Tuple[np.ndarray, Matrix]:
    if d < 1 or d > len(pairs):
        raise InvalidParameterError(f"d={d} outside 1..{len(pairs)}")
    values = np.array([p.value for p in pairs[:d]], dtype=np.float64)
    vectors = np.column_stack([p.vector for p in pairs[:d]])
    return values, vectors
