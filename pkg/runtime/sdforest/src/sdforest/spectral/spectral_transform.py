"""
Construction and application of spectral transforms.

All functions are pure; raised exceptions are documented in the docstrings.
"""
import numpy as np
import scipy.linalg

from sdforest.com.errors import DegenerateRankError, RangeError, ShapeError, ZeroVarianceError, ConfigError
from sdforest.com.logging_utils import ProjectLogger
from sdforest.com.shared_helper import as_matrix
from sdforest.spectral.spectral_model import SpectralTransform, SvdFactors, TransformOptions

logger = ProjectLogger(__name__).get_logger()

RANK_TOL = 1e-10


def compute_svd(M) -> SvdFactors:
    """
    Thin SVD keeping singular values above RANK_TOL times the largest one.

    Args:
        M: n x p real matrix.
    Returns:
        SvdFactors: U, d (non-increasing, strictly positive), V.
    Raises:
        NonFiniteInputError: If M has NaN or infinite entries.
        ShapeError: If M is empty.
        DegenerateRankError: If M is all zero.
    """
    A = as_matrix(M, "M")
    if A.size == 0:
        raise ShapeError(f"Cannot decompose an empty matrix of shape {A.shape}.")
    try:
        U, d, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesdd")
    except scipy.linalg.LinAlgError:
        logger.warning("gesdd did not converge, retrying with gesvd")
        U, d, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
    if d.size == 0 or d[0] <= 0.0:
        raise DegenerateRankError("Matrix has no non-zero singular value.")
    keep = d > RANK_TOL * d[0]
    return SvdFactors(U=U[:, keep], d=d[keep], V=Vt[keep].T)


def standardize_columns(X, column_names=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Center columns to mean 0 and scale to sample standard deviation 1.

    Returns:
        tuple: standardized matrix, column means, column standard deviations.
    Raises:
        ShapeError: If there are fewer than two rows.
        ZeroVarianceError: Naming the first constant column.
    """
    A = as_matrix(X)
    if A.shape[0] < 2:
        raise ShapeError("Column standardization needs at least two rows.")
    center = A.mean(axis=0)
    scale = A.std(axis=0, ddof=1)
    flat = scale <= 1e-12 * np.maximum(1.0, np.abs(center))
    if flat.any():
        j = int(np.flatnonzero(flat)[0])
        raise ZeroVarianceError(j, column_names[j] if column_names is not None else None)
    return (A - center) / scale, center, scale


def _design(X, scale_columns: bool, column_names=None):
    if scale_columns:
        return standardize_columns(X, column_names)
    return as_matrix(X), None, None


def trim_transform(X, scale_columns: bool = False, column_names=None) -> SpectralTransform:
    """
    Trim transform: caps every singular value of X at the median singular value tau.

    Args:
        X: n x p design matrix.
        scale_columns (bool): standardize columns before the SVD.
        column_names: optional names used in the zero-variance error.
    Returns:
        SpectralTransform: kind "trim" with shrink_i = min(d_i, tau) / d_i.
    Raises:
        ZeroVarianceError: constant column while scale_columns is set.
        DegenerateRankError: fewer than two non-zero singular values.
    """
    A, center, scale = _design(X, scale_columns, column_names)
    factors = compute_svd(A)
    if factors.rank < 2:
        raise DegenerateRankError(f"Trim transform needs rank >= 2, got rank {factors.rank}.")
    tau = float(np.median(factors.d))
    shrink = np.minimum(factors.d, tau) / factors.d
    logger.debug("trim transform: n=%d rank=%d tau=%.6g", A.shape[0], factors.rank, tau)
    return SpectralTransform(kind="trim", U=factors.U, shrink=shrink, tau=tau, n=A.shape[0], column_center=center, column_scale=scale)


def pca_transform(X, q_remove: int, scale_columns: bool = False, column_names=None) -> SpectralTransform:
    """
    PCA adjustment: removes the q_remove leading singular directions entirely.

    Raises:
        RangeError: If q_remove is negative or exceeds the rank of X.
    """
    A, center, scale = _design(X, scale_columns, column_names)
    factors = compute_svd(A)
    if q_remove < 0 or q_remove > factors.rank:
        raise RangeError(f"q_remove={q_remove} outside [0, {factors.rank}] (rank of X).")
    shrink = np.ones(factors.rank)
    shrink[:q_remove] = 0.0
    return SpectralTransform(kind="pca", U=factors.U, shrink=shrink, n=A.shape[0], column_center=center, column_scale=scale)


def identity_transform(n: int) -> SpectralTransform:
    """Identity transform on R^n (classical least squares)."""
    return SpectralTransform(kind="identity", U=np.zeros((n, 0)), shrink=np.zeros(0), n=n)


def build_transform(X, options: TransformOptions, column_names=None) -> SpectralTransform:
    """
    Build the transform described by options for the design X.

    Raises:
        ConfigError: For an unknown transform kind.
    """
    if options.kind == "trim":
        return trim_transform(X, scale_columns=options.scale_columns, column_names=column_names)
    if options.kind == "pca":
        return pca_transform(X, options.q_remove, scale_columns=options.scale_columns, column_names=column_names)
    if options.kind == "identity":
        return identity_transform(np.shape(X)[0])
    raise ConfigError(f"Unknown transform kind '{options.kind}'.")


def apply(transform: SpectralTransform, v) -> np.ndarray:
    """
    Compute Q v = v - U ((1 - shrink) * (U^T v)) without materializing Q.

    Args:
        transform (SpectralTransform): the transform.
        v: n-vector or n x k matrix.
    Returns:
        np.ndarray: same shape as v; the identity returns v itself.
    Raises:
        ShapeError: If the leading dimension of v is not transform.n.
    """
    arr = np.asarray(v, dtype=float)
    if arr.ndim not in (1, 2) or arr.shape[0] != transform.n:
        raise ShapeError(f"Leading dimension {arr.shape[:1]} does not match transform dimension {transform.n}.")
    if transform.kind == "identity":
        return arr
    weights = 1.0 - transform.shrink
    active = weights > 0.0
    if not active.any():
        return arr.copy()
    U = transform.U[:, active]
    coef = U.T @ arr
    if arr.ndim == 1:
        return arr - U @ (weights[active] * coef)
    return arr - U @ (weights[active][:, None] * coef)


def materialize(transform: SpectralTransform) -> np.ndarray:
    """Dense symmetric n x n matrix of the transform."""
    if transform.kind == "identity":
        return np.eye(transform.n)
    weights = 1.0 - transform.shrink
    Q = np.eye(transform.n) - (transform.U * weights) @ transform.U.T
    return 0.5 * (Q + Q.T)


def direction_spectrum(X, transform: SpectralTransform) -> tuple[np.ndarray, np.ndarray]:
    """
    Singular values of X and the per-direction values of Q X along the right singular vectors of X.

    Values below the numerical rank cutoff are reported as exact zeros.

    Returns:
        tuple: (d, transformed) with transformed_i = ||Q X v_i||_2.
    """
    A = transform.prepare(X)
    factors = compute_svd(A)
    transformed = np.linalg.norm(apply(transform, A) @ factors.V, axis=0)
    transformed[transformed <= RANK_TOL * factors.d[0]] = 0.0
    return factors.d, transformed
