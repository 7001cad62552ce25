"""
Ground-truth direct functions f0 used by the simulations.

Both kinds are pydantic models so their coefficients land in the dataset sidecar and can be
re-evaluated later (e.g. for analytic partial dependence curves).
"""
from typing import Annotated, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import Field, model_validator

from sdforest.com.base_model import FrozenModel
from sdforest.com.errors import ConfigError
from sdforest.com.shared_helper import as_matrix
from sdforest.tree.tree_model import route_to_leaves

FOURIER_FREQUENCY = 0.2
REFERENCE_SIZE = 500


class FourierF0(FrozenModel):
    """
    Additive Fourier function f0(x) = sum_j sum_k a[j][k] cos(0.2 k x_j) + b[j][k] sin(0.2 k x_j) over the parents.

    Attributes:
        parents (list[int]): covariate indices of the causal parents.
        a, b (list[list[float]]): one row of K coefficients per parent.
    """
    kind: Literal["fourier"] = "fourier"
    parents: list[int] = Field(default_factory=list)
    a: list[list[float]] = Field(default_factory=list)
    b: list[list[float]] = Field(default_factory=list)
    frequency: float = FOURIER_FREQUENCY

    @model_validator(mode="after")
    def _check_shapes(self):
        if len(self.a) != len(self.parents) or len(self.b) != len(self.parents):
            raise ValueError("a and b need one coefficient row per parent")
        return self

    def component(self, position: int, x) -> np.ndarray:
        """Term of the parent at `position` in `parents`, evaluated at the values x of that covariate."""
        x = np.asarray(x, dtype=float)
        result = np.zeros_like(x)
        for k, (a_k, b_k) in enumerate(zip(self.a[position], self.b[position]), start=1):
            result += a_k * np.cos(self.frequency * k * x) + b_k * np.sin(self.frequency * k * x)
        return result

    def __call__(self, X) -> np.ndarray:
        A = as_matrix(X)
        result = np.zeros(A.shape[0])
        for position, j in enumerate(self.parents):
            result += self.component(position, A[:, j])
        return result


class RandomTreeF0(FrozenModel):
    """
    Piecewise constant function given by a random regression tree over the parents.

    Node arrays follow the routing convention of fitted trees: -1 children mark leaves and
    rows with x <= threshold go left.
    """
    kind: Literal["random_tree"] = "random_tree"
    parents: list[int]
    covariate: list[int]
    threshold: list[float]
    left: list[int]
    right: list[int]
    value: list[float]

    @property
    def leaf_count(self) -> int:
        return sum(1 for child in self.left if child < 0)

    def __call__(self, X) -> np.ndarray:
        A = as_matrix(X)
        leaves = route_to_leaves(A, np.asarray(self.covariate), np.asarray(self.threshold), np.asarray(self.left), np.asarray(self.right))
        return np.asarray(self.value)[leaves]


F0Function = Annotated[Union[FourierF0, RandomTreeF0], Field(discriminator="kind")]


def _uniform_matrix(rng: np.random.Generator, rows: int, cols: int, scale: float) -> np.ndarray:
    return rng.uniform(-scale, scale, size=(rows, cols)) if scale > 0 else np.zeros((rows, cols))


def make_fourier_f0(parents: Sequence[int], K: int = 2, rng=None, coef_range: float = 1.0) -> FourierF0:
    """
    Random additive Fourier function with a and b coefficients uniform on [-coef_range, coef_range].

    An empty parent set gives the zero function.
    """
    if K < 1:
        raise ConfigError(f"Number of Fourier terms must be >= 1, got {K}.")
    generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    parents = [int(j) for j in parents]
    a = _uniform_matrix(generator, len(parents), K, coef_range)
    b = _uniform_matrix(generator, len(parents), K, coef_range)
    return FourierF0(parents=parents, a=a.tolist(), b=b.tolist())


def make_random_tree_f0(rng=None, leaves: int = 10, parents: Optional[Sequence[int]] = None, reference_size: int = REFERENCE_SIZE) -> RandomTreeF0:
    """
    Grow a regression tree with random splits until it has `leaves` leaves.

    Each step picks a uniform leaf among those with at least two reference points, a uniform parent
    covariate and a threshold uniform within the leaf's reference support of that covariate. The
    reference sample is standard normal. Leaf levels are i.i.d. standard normal.
    """
    if leaves < 1:
        raise ConfigError(f"leaves must be >= 1, got {leaves}.")
    generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    parents = [0] if parents is None else [int(j) for j in parents]
    if not parents:
        raise ConfigError("A random tree function needs at least one parent covariate.")
    reference = generator.standard_normal((reference_size, len(parents)))
    covariate, threshold, left, right = [0], [0.0], [-1], [-1]
    members = {0: np.arange(reference_size)}
    while len(members) < leaves:
        eligible = sorted(node for node, rows in members.items() if rows.size >= 2)
        if not eligible:
            break
        node = eligible[int(generator.integers(len(eligible)))]
        position = int(generator.integers(len(parents)))
        values = reference[members[node], position]
        split = float(generator.uniform(values.min(), values.max()))
        rows = members.pop(node)
        go_left = reference[rows, position] <= split
        for child_rows in (rows[go_left], rows[~go_left]):
            members[len(left)] = child_rows
            covariate.append(0)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
        covariate[node], threshold[node] = parents[position], split
        left[node], right[node] = len(left) - 2, len(left) - 1
    levels = np.zeros(len(left))
    leaf_nodes = [node for node in range(len(left)) if left[node] < 0]
    levels[leaf_nodes] = generator.standard_normal(len(leaf_nodes))
    return RandomTreeF0(parents=parents, covariate=covariate, threshold=threshold, left=left, right=right, value=levels.tolist())
