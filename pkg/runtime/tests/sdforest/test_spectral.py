"""Tests for SVD factors and the trim, pca and identity transforms."""
import numpy as np
import pytest

from sdforest.com.errors import DegenerateRankError, NonFiniteInputError, RangeError, ShapeError, ZeroVarianceError
from sdforest.spectral import (TransformOptions, apply, build_transform, compute_svd, direction_spectrum, identity_transform, materialize,
                               pca_transform, standardize_columns, trim_transform)


@pytest.mark.parametrize("shape", [(30, 8), (8, 30), (25, 25)])
def test_compute_svd_reconstruction(rng, shape):
    """Test orthonormal factors, ordering and reconstruction of the thin SVD."""
    M = rng.standard_normal(shape)
    factors = compute_svd(M)
    assert np.allclose(factors.U.T @ factors.U, np.eye(factors.rank), atol=1e-8)
    assert np.allclose(factors.V.T @ factors.V, np.eye(factors.rank), atol=1e-8)
    assert np.all(factors.d > 0) and np.all(np.diff(factors.d) <= 0)
    recon = factors.U @ np.diag(factors.d) @ factors.V.T
    assert np.linalg.norm(recon - M) / np.linalg.norm(M) < 1e-8


def test_compute_svd_drops_null_directions(rng):
    """Test that a rank deficient matrix keeps only its non-zero singular values."""
    M = rng.standard_normal((20, 3)) @ rng.standard_normal((3, 10))
    assert compute_svd(M).rank == 3


@pytest.mark.parametrize("bad,error", [
    (np.zeros((4, 3)), DegenerateRankError),
    (np.full((4, 3), np.nan), NonFiniteInputError),
    (np.zeros((0, 3)), ShapeError),
    (np.ones(5), ShapeError),
])
def test_compute_svd_errors(bad, error):
    """Test the documented errors of compute_svd."""
    with pytest.raises(error):
        compute_svd(bad)


def test_trim_transform_caps_singular_values(rng):
    """Test on random matrices that Q X has singular values min(d_i, tau) and Q has eigenvalues in [0, 1]."""
    for _ in range(50):
        n, p = rng.integers(5, 40, size=2)
        X = rng.standard_normal((n, p)) * rng.uniform(0.1, 5.0, size=p)
        transform = trim_transform(X)
        d = np.linalg.svd(X, compute_uv=False)
        d = d[d > 1e-10 * d[0]]
        assert transform.tau == pytest.approx(np.median(d))
        expected = np.minimum(d, transform.tau)
        Q = materialize(transform)
        got = np.linalg.svd(Q @ X, compute_uv=False)[:d.size]
        assert np.allclose(got, expected, rtol=0, atol=1e-8 * d[0])
        assert np.allclose(got[d <= transform.tau], d[d <= transform.tau], rtol=0, atol=1e-8 * d[0])
        assert np.allclose(Q, Q.T)
        eigenvalues = np.linalg.eigvalsh(Q)
        assert eigenvalues.min() > -1e-10 and eigenvalues.max() < 1 + 1e-10


def test_trim_transform_shrink_ratios(rng):
    """Test shrink_i = min(d_i, tau) / d_i."""
    X = rng.standard_normal((40, 12))
    transform = trim_transform(X)
    d = np.linalg.svd(X, compute_uv=False)
    assert np.allclose(transform.shrink, np.minimum(d, transform.tau) / d)
    assert transform.shrink.max() <= 1.0


def test_trim_identity_design_is_unchanged():
    """Test that all singular values equal to one are left unchanged by the trim transform."""
    X = np.eye(10)
    d, trimmed = direction_spectrum(X, trim_transform(X))
    assert np.allclose(d, 1.0)
    assert np.allclose(trimmed, 1.0)


def test_trim_transform_rank_one_fails(rng):
    """Test that a rank one design cannot define a trim transform."""
    X = np.outer(rng.standard_normal(10), rng.standard_normal(4))
    with pytest.raises(DegenerateRankError):
        trim_transform(X)


def test_pca_transform_removes_leading_directions(rng):
    """Test that pca output has exactly q_remove zeros and leaves other directions unchanged."""
    X = rng.standard_normal((30, 8))
    d, transformed = direction_spectrum(X, pca_transform(X, 3))
    assert np.count_nonzero(transformed == 0.0) == 3
    assert np.allclose(transformed[3:], d[3:])
    assert np.all(transformed[:3] == 0.0)


def test_pca_transform_range(rng):
    """Test that q_remove beyond the rank raises RangeError."""
    X = rng.standard_normal((10, 4))
    with pytest.raises(RangeError):
        pca_transform(X, 5)
    with pytest.raises(RangeError):
        pca_transform(X, -1)


def test_identity_apply_returns_input(rng):
    """Test that the identity transform returns its argument unchanged."""
    v = rng.standard_normal(12)
    transform = identity_transform(12)
    assert apply(transform, v) is v
    assert np.array_equal(materialize(transform), np.eye(12))


def test_apply_matches_materialized_operator(rng):
    """Test lazy application against the dense operator for vectors and matrices."""
    X = rng.standard_normal((25, 10))
    transform = trim_transform(X)
    Q = materialize(transform)
    v = rng.standard_normal(25)
    V = rng.standard_normal((25, 3))
    assert np.allclose(apply(transform, v), Q @ v)
    assert np.allclose(apply(transform, V), Q @ V)
    with pytest.raises(ShapeError):
        apply(transform, np.ones(24))


def test_standardize_columns_zero_variance_names_column(rng):
    """Test that a constant column is reported by name."""
    X = rng.standard_normal((10, 3))
    X[:, 1] = 4.0
    with pytest.raises(ZeroVarianceError) as excinfo:
        standardize_columns(X, column_names=["a", "b", "c"])
    assert excinfo.value.column == 1
    assert "'b'" in str(excinfo.value)


def test_build_transform_options(rng):
    """Test that build_transform dispatches on the options and scales columns when asked."""
    X = rng.standard_normal((20, 5)) * 10 + 3
    scaled = build_transform(X, TransformOptions())
    assert scaled.kind == "trim" and scaled.column_center is not None
    assert build_transform(X, TransformOptions(kind="identity")).rank == 0
    assert build_transform(X, TransformOptions(kind="pca", q_remove=2, scale_columns=False)).shrink[:2].tolist() == [0.0, 0.0]


def test_apply_fixes_complement_of_column_space(rng):
    """Test that vectors orthogonal to the column space of X pass through the trim transform unchanged."""
    X = rng.standard_normal((30, 6))
    transform = trim_transform(X)
    w = rng.standard_normal(30)
    basis, _ = np.linalg.qr(X)
    v = w - basis @ (basis.T @ w)
    assert np.allclose(apply(transform, v), v, atol=1e-10)


def test_apply_is_symmetric(rng):
    """Test <Q a, b> = <a, Q b> for the trim and pca transforms."""
    X = rng.standard_normal((30, 12))
    a = rng.standard_normal(30)
    b = rng.standard_normal(30)
    for transform in (trim_transform(X), pca_transform(X, 3)):
        assert np.dot(apply(transform, a), b) == pytest.approx(np.dot(a, apply(transform, b)), rel=1e-10, abs=1e-12)
