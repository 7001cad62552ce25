"""
Models for singular value factors and spectral transforms.

A spectral transform stores Q = I_n - U diag(1 - shrink) U^T in factorized form;
it is never materialized unless explicitly requested.
"""
from typing import Literal, Optional

import numpy as np
from pydantic import Field, model_validator

from sdforest.com.base_model import ArrayModel, FrozenModel

TransformKind = Literal["trim", "pca", "identity"]


class SvdFactors(ArrayModel):
    """
    Thin singular value decomposition M = U diag(d) V^T.

    Attributes:
        U (np.ndarray): n x r matrix with orthonormal columns.
        d (np.ndarray): r positive singular values, non-increasing.
        V (np.ndarray): p x r matrix with orthonormal columns.
    """
    U: np.ndarray
    d: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        """Number of retained non-zero singular values."""
        return int(self.d.shape[0])


class SpectralTransform(ArrayModel):
    """
    Factorized spectral transform.

    Attributes:
        kind (TransformKind): trim, pca or identity.
        U (np.ndarray): n x r orthonormal basis of the column space of the design.
        shrink (np.ndarray): r ratios in [0, 1] applied along the columns of U.
        tau (Optional[float]): trim threshold (None for pca and identity).
        n (int): ambient dimension.
        column_center (Optional[np.ndarray]): column means removed before the SVD, if standardized.
        column_scale (Optional[np.ndarray]): column standard deviations used for standardization.
    """
    kind: TransformKind
    U: np.ndarray
    shrink: np.ndarray
    tau: Optional[float] = None
    n: int = Field(..., ge=1)
    column_center: Optional[np.ndarray] = None
    column_scale: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def _check_factors(self):
        if self.U.shape != (self.n, self.shrink.shape[0]):
            raise ValueError(f"U has shape {self.U.shape}, expected ({self.n}, {self.shrink.shape[0]})")
        if self.shrink.size and (self.shrink.min() < 0.0 or self.shrink.max() > 1.0):
            raise ValueError("shrink ratios must lie in [0, 1]")
        return self

    @property
    def rank(self) -> int:
        """Number of directions carried by the transform."""
        return int(self.shrink.shape[0])

    def prepare(self, X: np.ndarray) -> np.ndarray:
        """Apply the column standardization the transform was built with (no-op otherwise)."""
        if self.column_center is None:
            return np.asarray(X, dtype=float)
        return (np.asarray(X, dtype=float) - self.column_center) / self.column_scale


class TransformOptions(FrozenModel):
    """
    How a spectral transform is built from a design matrix.

    Attributes:
        kind (TransformKind): trim (default), pca or identity (classical baseline).
        scale_columns (bool): standardize columns before the SVD.
        q_remove (int): number of leading directions removed by the pca transform.
    """
    kind: TransformKind = Field(default="trim", description="Spectral transform used for the objective")
    scale_columns: bool = Field(default=True, description="Standardize columns (mean 0, sd 1) before the SVD")
    q_remove: int = Field(default=0, ge=0, description="Leading singular directions removed by the pca transform")
