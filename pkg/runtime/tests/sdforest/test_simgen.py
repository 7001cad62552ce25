"""Tests for the synthetic confounding models, f0 functions and dense perturbations."""
import numpy as np
import pytest
from pydantic import ValidationError

from sdforest.com.errors import ConfigError, ShapeError
from sdforest.simgen import (FourierF0, SimSpec, draw_process, gen_linear, gen_nonlinear, make_fourier_f0, make_random_tree_f0,
                             perturb_dense, transform_diagnostic)
from sdforest.spectral import TransformOptions, build_transform


def test_unconfounded_model_is_exact():
    """Test that q = 0 gives X == E and Y == f0(X) + noise exactly."""
    data = gen_linear(SimSpec(n=50, p=8, q=0, n_parents=3, seed=1))
    assert np.array_equal(data.X, data.E)
    assert np.array_equal(data.Y, data.f0_values + data.nu)
    assert np.all(data.confounding == 0)


def test_response_identity():
    """Test Y = f0(X) + H delta + noise and X = H Gamma + E for a confounded draw."""
    data = gen_linear(SimSpec(n=40, p=10, q=4, n_parents=3, seed=2))
    assert np.allclose(data.Y, data.f0_values + data.H @ data.delta + data.nu, atol=1e-12)
    assert np.allclose(data.X, data.H @ data.Gamma + data.E, atol=1e-12)
    assert np.allclose(data.f0_values, data.f0(data.X))
    assert len(data.parents) == 3 and all(0 <= j < 10 for j in data.parents)


def test_zero_density_leaves_covariates_unconfounded():
    """Test density = 0: every Gamma column is zero while Y stays confounded."""
    data = gen_linear(SimSpec(n=30, p=6, q=2, density=0.0, n_parents=1, seed=3))
    assert np.all(data.Gamma == 0)
    assert np.array_equal(data.X, data.E)
    assert not data.process.affected.any()


def test_partial_density_count():
    """Test that ceil(density * p) covariates keep their Gamma column."""
    process = draw_process(SimSpec(p=20, q=3, density=0.33, n_parents=2, seed=4))
    assert process.affected.sum() == 7
    assert np.all(process.Gamma[:, ~process.affected] == 0)


def test_same_seed_reproduces_dataset():
    """Test bit-identical datasets from equal seeds and different ones from other seeds."""
    spec = SimSpec(n=30, p=7, q=2, n_parents=2, seed=11)
    first, second = gen_linear(spec), gen_linear(spec)
    assert np.array_equal(first.X, second.X) and np.array_equal(first.Y, second.Y)
    other = gen_linear(spec.model_copy(update={"seed": 12}))
    assert not np.array_equal(first.X, other.X)


def test_confounding_is_dense():
    """Test that the smallest singular value of Gamma stays of order sqrt(p) over 50 draws."""
    for seed in range(50):
        Gamma = draw_process(SimSpec(p=200, q=10, n_parents=1, seed=seed)).Gamma
        assert np.linalg.svd(Gamma, compute_uv=False).min() / np.sqrt(200) > 0.5


def test_second_moments():
    """Test column variances 1 + |Gamma_j|^2 and the confounding variance |delta|^2 within 4 standard errors."""
    spec = SimSpec(n=20000, p=5, q=2, n_parents=1, seed=8)
    data = gen_linear(spec)
    expected = 1.0 + (data.Gamma ** 2).sum(axis=0)
    standard_error = expected * np.sqrt(2.0 / spec.n)
    assert np.all(np.abs(data.X.var(axis=0) - expected) < 4 * standard_error)
    assert abs(data.X.mean(axis=0)).max() < 4 * np.sqrt(expected.max() / spec.n)
    confounding_variance = float(data.delta @ data.delta)
    assert abs(data.confounding.var() - confounding_variance) < 4 * confounding_variance * np.sqrt(2.0 / spec.n)


def test_parents_must_fit():
    """Test that more parents than covariates is rejected."""
    with pytest.raises(ValidationError):
        SimSpec(p=3, n_parents=4)


def test_fourier_closed_form():
    """Test a Fourier f0 against its explicit formula."""
    f0 = FourierF0(parents=[2], a=[[1.0, 0.0]], b=[[0.0, 1.0]])
    X = np.zeros((5, 3))
    X[:, 2] = np.linspace(-3, 3, 5)
    assert np.allclose(f0(X), np.cos(0.2 * X[:, 2]) + np.sin(0.4 * X[:, 2]))


def test_fourier_zero_function_and_additivity(rng):
    """Test the empty parent set and additivity over parents."""
    X = rng.standard_normal((20, 4))
    assert np.all(make_fourier_f0([], 3, rng)(X) == 0)
    f0 = make_fourier_f0([0, 3], 2, rng)
    left = FourierF0(parents=[0], a=f0.a[:1], b=f0.b[:1])
    right = FourierF0(parents=[3], a=f0.a[1:], b=f0.b[1:])
    assert np.allclose(f0(X), left(X) + right(X))
    assert np.allclose(f0.component(1, X[:, 3]), right(X))
    with pytest.raises(ConfigError):
        make_fourier_f0([0], 0, rng)


def test_random_tree_single_leaf_is_constant(rng):
    """Test that one leaf gives a constant function."""
    f0 = make_random_tree_f0(rng, leaves=1, parents=[1])
    values = f0(rng.standard_normal((30, 3)))
    assert f0.leaf_count == 1
    assert np.all(values == values[0])


def test_random_tree_levels_on_reference_sample():
    """Test that the reference sample reaches all ten leaves and the function is piecewise constant."""
    parents = [0, 2]
    f0 = make_random_tree_f0(np.random.default_rng(77), leaves=10, parents=parents)
    reference = np.random.default_rng(77).standard_normal((500, len(parents)))
    X = np.zeros((500, 3))
    X[:, parents] = reference
    assert f0.leaf_count == 10
    assert np.unique(f0(X)).size == 10
    assert set(f0.value[node] for node in range(len(f0.left)) if f0.left[node] < 0) == set(np.unique(f0(X)))
    assert {f0.covariate[node] for node in range(len(f0.left)) if f0.left[node] >= 0} <= set(parents)


def test_random_tree_requires_parents(rng):
    """Test that an empty parent set is rejected."""
    with pytest.raises(ConfigError):
        make_random_tree_f0(rng, leaves=3, parents=[])


def test_random_tree_f0_in_linear_model():
    """Test the random-tree response function inside the linear model."""
    data = gen_linear(SimSpec(n=50, p=6, q=1, n_parents=2, f0_kind="random_tree", random_tree_leaves=4, seed=9))
    assert data.f0.kind == "random_tree"
    assert np.unique(data.f0_values).size <= 4


def test_nonlinear_without_effects():
    """Test that zero effect ranges remove the confounding from X and Y."""
    data = gen_nonlinear(SimSpec(n=40, p=5, n_parents=2, x_effect_range=0.0, y_effect_range=0.0, seed=10))
    assert np.array_equal(data.X, data.E)
    assert np.all(data.confounding == 0)
    assert data.H.shape == (40, 1)


def test_nonlinear_confounding_has_bounded_rank():
    """Test that the confounded part of X spans at most 2K directions and Y follows its identity."""
    spec = SimSpec(n=200, p=60, n_parents=2, nonlinear_terms=12, seed=12)
    data = gen_nonlinear(spec)
    rank = np.linalg.matrix_rank(data.X - data.E)
    assert 1 <= rank <= 24
    features = data.process.features(data.H)
    assert features.shape == (200, 24)
    assert np.allclose(data.Y, data.f0_values + features @ data.delta + data.nu, atol=1e-12)


def test_perturbation_at_zero_is_identity(confounded_data):
    """Test tau = 0 leaves the data unchanged."""
    X, Y, _ = perturb_dense(confounded_data.X, confounded_data.Y, 0.0, rng=1)
    assert np.array_equal(X, confounded_data.X) and np.array_equal(Y, confounded_data.Y)


def test_perturbation_is_linear_in_tau(confounded_data):
    """Test that reused draws make the perturbation linear in tau."""
    X1, Y1, draws = perturb_dense(confounded_data.X, confounded_data.Y, 1.0, rng=2)
    X3, Y3, _ = perturb_dense(confounded_data.X, confounded_data.Y, 3.0, draws=draws)
    assert np.allclose(X3 - confounded_data.X, 3 * (X1 - confounded_data.X))
    assert np.allclose(Y3 - confounded_data.Y, 3 * (Y1 - confounded_data.Y))
    assert np.allclose(Y1 - confounded_data.Y, draws.delta * draws.H[:, 0])


def test_perturbation_draws_must_match(confounded_data):
    """Test shape validation of reused draws."""
    _, _, draws = perturb_dense(confounded_data.X, confounded_data.Y, 1.0, rng=3)
    with pytest.raises(ShapeError):
        perturb_dense(confounded_data.X[:10], confounded_data.Y[:10], 1.0, draws=draws)


def test_perturbation_variance_over_draws():
    """Test the variance tau^2 of the added covariate shift over 20 independent draws."""
    X = np.zeros((400, 3))
    pooled = []
    for seed in range(20):
        shifted, _, draws = perturb_dense(X, np.zeros(400), 2.0, rng=seed)
        pooled.append(shifted[:, 0] / draws.Gamma[0, 0])
    pooled = np.concatenate(pooled)
    assert abs(pooled.var() - 4.0) < 4 * 4.0 * np.sqrt(2.0 / pooled.size)


def test_transform_diagnostic_improves_correlation():
    """Test that trimming raises the correlation of f0(X) with Y under dense confounding."""
    data = gen_linear(SimSpec(n=300, p=150, q=5, n_parents=3, seed=13))
    diagnostic = transform_diagnostic(data, build_transform(data.X, TransformOptions()))
    assert -1 <= diagnostic.corr_raw <= 1
    assert diagnostic.corr_transformed > diagnostic.corr_raw


def test_nonlinear_defaults():
    """Test the nonlinear setting and that overrides take precedence over it."""
    spec = SimSpec.nonlinear_defaults()
    assert (spec.n, spec.p, spec.q, spec.n_parents) == (500, 300, 1, 1)
    assert spec.sigma_nu == 0.01 and spec.delta_scale == 2.0
    small = SimSpec.nonlinear_defaults(n=40, p=8, seed=3)
    assert (small.n, small.p, small.q, small.n_parents) == (40, 8, 1, 1)
    data = gen_nonlinear(small)
    assert data.X.shape == (40, 8) and data.H.shape == (40, 1)
    assert len(data.process.parents) == 1
    with pytest.raises(ValidationError):
        SimSpec.nonlinear_defaults(p=0)
