"""
Variable importance, regularization and stability paths, and partial dependence of fitted forests.
"""
from typing import Optional

import numpy as np
from pydantic import Field

from sdforest.com.base_model import ArrayModel
from sdforest.com.errors import ConfigError, ShapeError
from sdforest.com.shared_helper import as_matrix
from sdforest.forest.ensemble import predict_forest
from sdforest.forest.forest_model import ForestModel
from sdforest.tree.sdtree import prune, tree_importance


class PathResult(ArrayModel):
    """Per-covariate values along a grid of cp values (rows follow cp_grid)."""
    cp_grid: np.ndarray
    values: np.ndarray


class PartialDependence(ArrayModel):
    """
    Partial dependence of one covariate.

    Attributes:
        covariate (int): covariate index.
        grid (np.ndarray): evaluation points.
        average (np.ndarray): mean prediction per grid point.
        individual (Optional[np.ndarray]): per-observation curves (k x len(grid)).
        individual_rows (Optional[np.ndarray]): rows of X_ref the individual curves belong to.
    """
    covariate: int
    grid: np.ndarray
    average: np.ndarray
    individual: Optional[np.ndarray] = None
    individual_rows: Optional[np.ndarray] = None


def variable_importance(model: ForestModel) -> np.ndarray:
    """Mean over trees of the summed recorded loss decreases per covariate."""
    return np.mean([tree_importance(tree) for tree in model.trees], axis=0)


def _check_grid(cp_grid) -> np.ndarray:
    grid = np.asarray(cp_grid, dtype=float).reshape(-1)
    if grid.size == 0 or np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ConfigError("cp grid must be a non-empty list of finite values >= 0.")
    return grid


def regularization_paths(model: ForestModel, cp_grid) -> PathResult:
    """Variable importance of the forest pruned at each cp of the grid."""
    grid = _check_grid(cp_grid)
    values = np.zeros((grid.size, model.n_features))
    for row, cp in enumerate(grid):
        values[row] = np.mean([tree_importance(prune(tree, cp)) for tree in model.trees], axis=0)
    return PathResult(cp_grid=grid, values=values)


def stability_paths(model: ForestModel, cp_grid) -> PathResult:
    """Fraction of trees that still split on each covariate after pruning at each cp of the grid."""
    grid = _check_grid(cp_grid)
    values = np.zeros((grid.size, model.n_features))
    for row, cp in enumerate(grid):
        used = np.zeros(model.n_features)
        for tree in model.trees:
            covariates = {node.covariate for node in prune(tree, cp).internal_nodes()}
            used[list(covariates)] += 1.0
        values[row] = used / model.n_trees
    return PathResult(cp_grid=grid, values=values)


def default_grid(X_ref, covariate: int, points: int = 50) -> np.ndarray:
    """Quantile grid between the 5% and 95% quantiles of a covariate."""
    column = as_matrix(X_ref, "X_ref")[:, covariate]
    return np.unique(np.quantile(column, np.linspace(0.05, 0.95, points)))


def partial_dependence(model: ForestModel, covariate: int, grid, X_ref, n_individual: int = 0, rng=None) -> PartialDependence:
    """
    Average forest prediction with covariate set to each grid value, other covariates taken from X_ref.

    Args:
        n_individual (int): number of rows of X_ref (drawn with rng) whose individual curves are returned.
    Raises:
        ShapeError: If covariate is out of range or X_ref has the wrong width.
    """
    A = as_matrix(X_ref, "X_ref")
    if A.shape[1] != model.n_features:
        raise ShapeError(f"X_ref has {A.shape[1]} columns, the forest was fitted on {model.n_features}.")
    if not 0 <= covariate < model.n_features:
        raise ShapeError(f"covariate {covariate} outside [0, {model.n_features}).")
    points = np.asarray(grid, dtype=float).reshape(-1)
    m = A.shape[0]
    stacked = np.tile(A, (points.size, 1))
    stacked[:, covariate] = np.repeat(points, m)
    curves = predict_forest(model, stacked).reshape(points.size, m).T
    individual, rows = None, None
    if n_individual > 0:
        generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        rows = np.sort(generator.choice(m, size=min(n_individual, m), replace=False))
        individual = curves[rows]
    return PartialDependence(covariate=covariate, grid=points, average=curves.mean(axis=0), individual=individual, individual_rows=rows)
