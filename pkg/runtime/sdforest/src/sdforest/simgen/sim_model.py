"""Simulation settings, confounding processes and generated datasets."""
from typing import ClassVar, Literal, Optional

import numpy as np
from pydantic import Field, model_validator

from sdforest.com.base_model import ArrayModel, FrozenModel
from sdforest.simgen.f0_functions import F0Function

F0Kind = Literal["fourier", "random_tree", "none"]


class SimSpec(FrozenModel):
    """
    Parameters of a synthetic confounding model.

    Attributes:
        n, p, q (int): sample size, covariates and hidden confounders.
        sigma_nu (float): standard deviation of the response noise.
        n_fourier (int): Fourier terms per parent of the Fourier f0.
        n_parents (int): number of causal parents of Y.
        density (float): fraction of covariates affected by the confounders.
        f0_kind (F0Kind): fourier, random_tree or none (zero function).
        coef_range (float): Fourier coefficients of f0 are uniform on [-coef_range, coef_range].
        random_tree_leaves (int): leaves of the random-tree f0.
        nonlinear_terms (int): Fourier basis size of the nonlinear confounding effects.
        x_effect_range, y_effect_range (float): coefficient ranges of the nonlinear effects on X and Y.
        delta_scale (float): standard deviation of the scalar multiplying the nonlinear effect on Y.
        seed (Optional[int]): seed used when no generator is passed.
    """
    n: int = Field(default=500, ge=1)
    p: int = Field(default=500, ge=1)
    q: int = Field(default=20, ge=0)
    sigma_nu: float = Field(default=0.1, ge=0.0)
    n_fourier: int = Field(default=2, ge=1)
    n_parents: int = Field(default=4, ge=0)
    density: float = Field(default=1.0, ge=0.0, le=1.0)
    f0_kind: F0Kind = "fourier"
    coef_range: float = Field(default=1.0, ge=0.0)
    random_tree_leaves: int = Field(default=10, ge=1)
    nonlinear_terms: int = Field(default=12, ge=1)
    x_effect_range: float = Field(default=1.0, ge=0.0)
    y_effect_range: float = Field(default=2.0, ge=0.0)
    delta_scale: float = Field(default=2.0, ge=0.0)
    seed: Optional[int] = Field(default=None, ge=0)

    # one univariate confounder acting on a single causal parent
    NONLINEAR_DEFAULTS: ClassVar[dict] = {"n": 500, "p": 300, "q": 1, "n_parents": 1, "sigma_nu": 0.01, "delta_scale": 2.0}

    @classmethod
    def nonlinear_defaults(cls, **overrides) -> "SimSpec":
        """Settings of the nonlinear confounding model, with optional overrides."""
        return cls.model_validate({**cls.NONLINEAR_DEFAULTS, **overrides})

    @model_validator(mode="after")
    def _parents_fit(self):
        if self.n_parents > self.p:
            raise ValueError(f"n_parents={self.n_parents} exceeds p={self.p}")
        return self


class ConfoundingProcess(ArrayModel):
    """
    One draw of the data-generating process, sampled any number of times.

    With kind "linear" the confounding features are H itself (n x q). With kind "nonlinear" they are
    the Fourier basis of a univariate H (n x 2K); Gamma and delta then hold the basis coefficients of
    the effects on X and Y.
    """
    kind: Literal["linear", "nonlinear"] = "linear"
    spec: SimSpec
    Gamma: np.ndarray
    delta: np.ndarray
    affected: np.ndarray
    f0: F0Function

    @property
    def parents(self) -> list[int]:
        return list(self.f0.parents)

    def features(self, H: np.ndarray) -> np.ndarray:
        """Confounding features entering X and Y linearly."""
        if self.kind == "linear":
            return H
        k = np.arange(1, self.spec.nonlinear_terms + 1)
        angle = 0.2 * H[:, :1] * k
        return np.column_stack([np.cos(angle), np.sin(angle)])

    def sample(self, n: int, rng) -> "SyntheticDataset":
        """Draw H, E and the noise for n fresh observations."""
        generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        q = self.spec.q if self.kind == "linear" else 1
        H = generator.standard_normal((n, q))
        E = generator.standard_normal((n, self.spec.p))
        nu = self.spec.sigma_nu * generator.standard_normal(n)
        C = self.features(H)
        X = C @ self.Gamma + E
        confounding = C @ self.delta
        f0_values = self.f0(X)
        return SyntheticDataset(X=X, Y=f0_values + confounding + nu, f0_values=f0_values, H=H, E=E, nu=nu,
                                confounding=confounding, process=self)


class SyntheticDataset(ArrayModel):
    """
    Generated data with every draw retained.

    Y equals f0_values + confounding + nu, where confounding is H delta in the linear model.
    """
    X: np.ndarray
    Y: np.ndarray
    f0_values: np.ndarray
    H: np.ndarray
    E: np.ndarray
    nu: np.ndarray
    confounding: np.ndarray
    process: ConfoundingProcess

    @property
    def parents(self) -> list[int]:
        return self.process.parents

    @property
    def Gamma(self) -> np.ndarray:  # pylint: disable=invalid-name
        return self.process.Gamma

    @property
    def delta(self) -> np.ndarray:
        return self.process.delta

    @property
    def f0(self):
        return self.process.f0


class PerturbationDraws(ArrayModel):
    """Draws of a synthetic dense confounder: H (n x 1), Gamma (1 x p), delta (scalar)."""
    H: np.ndarray
    Gamma: np.ndarray
    delta: float


class TransformDiagnostic(FrozenModel):
    """Correlation of f0(X) with Y before and after the spectral transform."""
    corr_raw: float
    corr_transformed: float
