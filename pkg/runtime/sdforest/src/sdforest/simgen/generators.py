"""
Generators for the linear and nonlinear confounding models and for dense perturbations.

Draw order is fixed (Gamma, delta, confounded mask, parents, f0, then H, E, noise) so identical
settings and seeds reproduce datasets bit for bit.
"""
import math
from typing import Optional

import numpy as np

from sdforest.com.errors import ShapeError
from sdforest.com.logging_utils import ProjectLogger
from sdforest.com.shared_helper import as_matrix, as_vector
from sdforest.simgen.f0_functions import FourierF0, make_fourier_f0, make_random_tree_f0
from sdforest.simgen.sim_model import ConfoundingProcess, PerturbationDraws, SimSpec, SyntheticDataset, TransformDiagnostic
from sdforest.spectral import SpectralTransform, apply

logger = ProjectLogger(__name__).get_logger()


def _generator(spec: SimSpec, rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(spec.seed if rng is None else rng)


def _draw_f0(spec: SimSpec, rng: np.random.Generator):
    parents = sorted(rng.choice(spec.p, size=spec.n_parents, replace=False).tolist())
    if spec.f0_kind == "fourier":
        return make_fourier_f0(parents, spec.n_fourier, rng, spec.coef_range)
    if spec.f0_kind == "random_tree":
        return make_random_tree_f0(rng, spec.random_tree_leaves, parents=parents)
    return FourierF0()


def draw_process(spec: SimSpec, rng=None) -> ConfoundingProcess:
    """
    Draw Gamma, delta, the confounded covariates and f0 of the linear confounding model.

    With density < 1 only ceil(density * p) random covariates keep their Gamma column.
    """
    generator = _generator(spec, rng)
    Gamma = generator.standard_normal((spec.q, spec.p))
    delta = generator.standard_normal(spec.q)
    affected = np.zeros(spec.p, dtype=bool)
    affected[generator.choice(spec.p, size=math.ceil(spec.density * spec.p), replace=False)] = True
    Gamma[:, ~affected] = 0.0
    f0 = _draw_f0(spec, generator)
    return ConfoundingProcess(kind="linear", spec=spec, Gamma=Gamma, delta=delta, affected=affected, f0=f0)


def draw_nonlinear_process(spec: SimSpec, rng=None) -> ConfoundingProcess:
    """
    Draw the nonlinear confounding model: X_j = g_j(H) + E_j and Y = f0(X) + d(H) + noise.

    g_j and d are Fourier functions of a univariate H with nonlinear_terms frequencies; the effect on Y
    is additionally scaled by a N(0, delta_scale^2) draw.
    """
    generator = _generator(spec, rng)
    width = 2 * spec.nonlinear_terms
    if spec.x_effect_range > 0:
        Gamma = generator.uniform(-spec.x_effect_range, spec.x_effect_range, size=(width, spec.p))
    else:
        Gamma = np.zeros((width, spec.p))
    if spec.y_effect_range > 0:
        d_coef = generator.uniform(-spec.y_effect_range, spec.y_effect_range, size=width)
    else:
        d_coef = np.zeros(width)
    delta = d_coef * (spec.delta_scale * generator.standard_normal())
    f0 = _draw_f0(spec, generator)
    return ConfoundingProcess(kind="nonlinear", spec=spec, Gamma=Gamma, delta=delta, affected=np.ones(spec.p, dtype=bool), f0=f0)


def gen_linear(spec: SimSpec, rng=None) -> SyntheticDataset:
    """Sample spec.n observations of X = H Gamma + E, Y = f0(X) + H delta + noise."""
    generator = _generator(spec, rng)
    return draw_process(spec, generator).sample(spec.n, generator)


def gen_nonlinear(spec: SimSpec, rng=None) -> SyntheticDataset:
    """
    Sample spec.n observations of the nonlinear confounding model.

    SimSpec defaults describe the linear model; build the spec with SimSpec.nonlinear_defaults() to get
    the usual nonlinear setting (q=1, p=300, one parent, sigma_nu=0.01).
    """
    generator = _generator(spec, rng)
    return draw_nonlinear_process(spec, generator).sample(spec.n, generator)


def perturb_dense(X, Y, tau: float, rng=None, draws: Optional[PerturbationDraws] = None) -> tuple[np.ndarray, np.ndarray, PerturbationDraws]:
    """
    Add a synthetic dense confounder: X_tau = X + tau H Gamma and Y_tau = Y + tau H delta.

    Pass the returned draws back in to reuse the same H, Gamma and delta across a tau grid.
    """
    A = as_matrix(X)
    y = as_vector(Y, A.shape[0])
    if draws is None:
        generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        draws = PerturbationDraws(H=generator.standard_normal((A.shape[0], 1)), Gamma=generator.standard_normal((1, A.shape[1])),
                                  delta=float(generator.standard_normal()))
    elif draws.H.shape[0] != A.shape[0] or draws.Gamma.shape[1] != A.shape[1]:
        raise ShapeError("Perturbation draws do not match the shape of X.")
    return A + tau * (draws.H @ draws.Gamma), y + tau * draws.delta * draws.H[:, 0], draws


def transform_diagnostic(dataset: SyntheticDataset, transform: SpectralTransform) -> TransformDiagnostic:
    """Correlation of f0(X) and Y, raw and after applying the transform to both."""
    def corr(a, b):
        if np.std(a) == 0 or np.std(b) == 0:
            return 0.0
        return float(np.corrcoef(a, b)[0, 1])

    return TransformDiagnostic(
        corr_raw=corr(dataset.f0_values, dataset.Y),
        corr_transformed=corr(apply(transform, dataset.f0_values), apply(transform, dataset.Y)),
    )
