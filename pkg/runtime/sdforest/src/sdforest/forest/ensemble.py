"""
Bootstrap aggregation of spectrally deconfounded trees.

Tree t is seeded with derive_seed(seed, t): its bootstrap sample comes from default_rng([tree_seed, 0])
and its covariate subsets from default_rng(tree_seed). The tree records tree_seed, and a fitted forest
does not depend on the number of worker threads.
"""
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from sdforest.com.errors import ConfigError, ShapeError
from sdforest.com.logging_utils import ProjectLogger
from sdforest.com.shared_helper import as_matrix, as_vector, child_rng, derive_seed, fresh_seed
from sdforest.forest.forest_model import ForestConfig, ForestModel
from sdforest.spectral import build_transform, materialize
from sdforest.tree.sdtree import fit_sdtree, predict_tree

logger = ProjectLogger(__name__).get_logger()

MIN_FOREST_ROWS = 10


def _fit_one(X, Y, config: ForestConfig, seed: int, t: int, mtry: int, shared_q: Optional[np.ndarray], feature_names):
    tree_seed = derive_seed(seed, t)
    n = X.shape[0]
    if config.bootstrap:
        idx = np.sort(child_rng(tree_seed, 0).choice(n, size=config.sample_size or n, replace=True))
    else:
        idx = None
    Xb = X if idx is None else X[idx]
    Yb = Y if idx is None else Y[idx]
    if shared_q is not None:
        transform = shared_q if idx is None else shared_q[np.ix_(idx, idx)]
    else:
        transform = build_transform(Xb, config.transform, feature_names)
    tree = fit_sdtree(Xb, Yb, transform, cp=config.cp, max_splits=config.max_splits, mtry=mtry, variant=config.variant,
                      rng=tree_seed, min_leaf=config.min_leaf, max_candidates=config.max_candidates,
                      retain_fit_data=config.retain_fit_data)
    return tree, (None if idx is None else idx.tolist())


def fit_forest(X, Y, config: Optional[ForestConfig] = None, n_jobs: int = 1, feature_names: Optional[list[str]] = None) -> ForestModel:
    """
    Fit a forest of spectrally deconfounded trees.

    Args:
        X: n x p covariates.
        Y: n responses.
        config (ForestConfig): hyper-parameters; the returned model stores them with the seed resolved.
        n_jobs (int): worker threads (the result does not depend on it).
        feature_names (Optional[list[str]]): column names kept for reporting.
    Raises:
        ShapeError: For fewer than 10 rows or mismatched shapes.
        ConfigError: For mtry outside [1, p].
        ZeroVarianceError: For a constant column while column scaling is on.
    """
    config = config or ForestConfig()
    A = as_matrix(X)
    n, p = A.shape
    y = as_vector(Y, n)
    if n < MIN_FOREST_ROWS:
        raise ShapeError(f"A forest needs at least {MIN_FOREST_ROWS} rows, got {n}.")
    if feature_names is not None and len(feature_names) != p:
        raise ShapeError(f"{len(feature_names)} feature names for {p} columns.")
    if np.ptp(y) == 0.0:
        logger.warning("Response is constant; every tree will be a single leaf.")
    if config.seed is None:
        config = config.model_copy(update={"seed": fresh_seed()})
    mtry = config.resolved_mtry(p)
    if mtry > p:
        raise ConfigError(f"mtry must lie in [1, {p}], got {mtry}.")
    shared_q = None
    if config.share_q:
        shared_q = materialize(build_transform(A, config.transform, feature_names))
    logger.info("fitting %d trees on n=%d p=%d (mtry=%d, transform=%s, jobs=%d)", config.n_trees, n, p, mtry, config.transform.kind, n_jobs)
    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_fit_one)(A, y, config, config.seed, t, mtry, shared_q, feature_names) for t in range(config.n_trees)
    )
    return ForestModel(
        version=ForestModel.SCHEMA_VERSION,
        trees=[tree for tree, _ in results],
        bootstrap_indices=[idx for _, idx in results],
        config=config,
        n_features=p,
        n_samples=n,
        feature_names=feature_names,
    )


def tree_predictions(model: ForestModel, X) -> np.ndarray:
    """m x T matrix of per-tree predictions."""
    A = as_matrix(X)
    if A.shape[1] != model.n_features:
        raise ShapeError(f"X has {A.shape[1]} columns, the forest was fitted on {model.n_features}.")
    return np.column_stack([predict_tree(tree, A) for tree in model.trees])


def predict_forest(model: ForestModel, X) -> np.ndarray:
    """Average of the tree predictions."""
    return tree_predictions(model, X).mean(axis=1)


def oob_predict(model: ForestModel, X_train) -> tuple[np.ndarray, np.ndarray]:
    """
    Out-of-bag predictions on the training rows.

    Without bootstrap the forest has no out-of-bag rows and the full prediction is returned.

    Returns:
        tuple: predictions (NaN where no tree left the row out) and the coverage mask.
    """
    A = as_matrix(X_train)
    if A.shape[0] != model.n_samples:
        raise ShapeError(f"X_train has {A.shape[0]} rows, the forest was fitted on {model.n_samples}.")
    per_tree = tree_predictions(model, A)
    if any(idx is None for idx in model.bootstrap_indices):
        return per_tree.mean(axis=1), np.ones(A.shape[0], dtype=bool)
    out_of_bag = np.ones(per_tree.shape, dtype=bool)
    for t, idx in enumerate(model.bootstrap_indices):
        out_of_bag[idx, t] = False
    counts = out_of_bag.sum(axis=1)
    covered = counts > 0
    predictions = np.full(A.shape[0], np.nan)
    predictions[covered] = np.where(out_of_bag, per_tree, 0.0).sum(axis=1)[covered] / counts[covered]
    return predictions, covered
