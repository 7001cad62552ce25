"""Singular value decomposition and spectral transforms (trim, pca, identity)."""

from sdforest.spectral.spectral_model import SvdFactors, SpectralTransform, TransformOptions
from sdforest.spectral.spectral_transform import (
    apply,
    build_transform,
    compute_svd,
    direction_spectrum,
    identity_transform,
    materialize,
    pca_transform,
    standardize_columns,
    trim_transform,
)

__all__ = [
    "SvdFactors",
    "SpectralTransform",
    "TransformOptions",
    "apply",
    "build_transform",
    "compute_svd",
    "direction_spectrum",
    "identity_transform",
    "materialize",
    "pca_transform",
    "standardize_columns",
    "trim_transform",
]
