"""
Greedy growth, prediction and pruning of spectrally deconfounded regression trees.
"""
from typing import Optional, Union

import numpy as np
import scipy.linalg

from sdforest.com.errors import ConfigError, ShapeError
from sdforest.com.logging_utils import ProjectLogger
from sdforest.com.shared_helper import as_matrix, as_vector
from sdforest.spectral import SpectralTransform, materialize
from sdforest.tree.partition_state import PartitionState, accept_split, evaluate_region_splits, is_near_tie
from sdforest.tree.tree_model import FitProjection, SDTreeModel, SplitCandidate, TreeNode, Variant, route_to_leaves

logger = ProjectLogger(__name__).get_logger()

ACCEPT_RTOL = 1e-12


def select_best(candidates) -> Optional[SplitCandidate]:
    """Highest-scoring candidate; near-ties go to the lowest (covariate, threshold, region)."""
    pool = [c for c in candidates if c is not None]
    if not pool:
        return None
    top = max(c.score for c in pool)
    tied = [c for c in pool if is_near_tie(c.score, top)]
    return min(tied, key=lambda c: (c.covariate, c.threshold, c.region))


def _dense_operator(transform, n: int) -> tuple[np.ndarray, str]:
    if isinstance(transform, SpectralTransform):
        if transform.n != n:
            raise ShapeError(f"Transform dimension {transform.n} does not match {n} rows of X.")
        return materialize(transform), transform.kind
    Q = as_matrix(transform, "Q")
    if Q.shape != (n, n):
        raise ShapeError(f"Q has shape {Q.shape}, expected ({n}, {n}).")
    return Q, "precomputed"


class TreeGrower:
    """
    Grows one tree by repeatedly accepting the split with the highest spectral score.

    The grower keeps the partition state and a per-split history (score and realized loss decrease),
    so callers can inspect how the tree was built.
    """

    def __init__(self, X, Y, transform: Union[SpectralTransform, np.ndarray], cp: float = 0.0, max_splits: Optional[int] = None,
                 mtry: Optional[int] = None, variant: Variant = "SDT1", rng=None, min_leaf: int = 5, max_candidates: int = 100):
        self.X = as_matrix(X)
        n, p = self.X.shape
        self.Y = as_vector(Y, n)
        if n < 2:
            raise ShapeError("A tree needs at least two observations.")
        if cp < 0:
            raise ConfigError(f"cp must be >= 0, got {cp}.")
        if max_splits is not None and max_splits < 1:
            raise ConfigError(f"max_splits must be >= 1 or unset, got {max_splits}.")
        self.mtry = p if mtry is None else int(mtry)
        if not 1 <= self.mtry <= p:
            raise ConfigError(f"mtry must lie in [1, {p}], got {mtry}.")
        if variant not in ("SDT1", "SDT2"):
            raise ConfigError(f"Unknown variant '{variant}'.")
        if min_leaf < 1 or max_candidates < 1:
            raise ConfigError("min_leaf and max_candidates must be >= 1.")
        self.Q, self.transform_kind = _dense_operator(transform, n)
        self.cp = float(cp)
        self.max_splits = max_splits
        self.variant = variant
        self.min_leaf = int(min_leaf)
        self.max_candidates = int(max_candidates)
        self.seed = int(rng) if isinstance(rng, (int, np.integer)) else None
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.state: Optional[PartitionState] = None
        self.history: list[dict] = []

    def _draw_covariates(self) -> np.ndarray:
        p = self.X.shape[1]
        if self.mtry == p:
            return np.arange(p)
        return np.sort(self.rng.choice(p, size=self.mtry, replace=False))

    def grow(self, retain_fit_data: bool = True) -> SDTreeModel:
        """Run the greedy loop until no admissible split remains, then build the model."""
        state = PartitionState(self.X, self.Y, self.Q, self.max_candidates)
        self.state = state
        floor = ACCEPT_RTOL * state.y_tilde_sq / state.n
        required = self.cp * state.loss_init
        nodes = [dict(node_id=0, parent=None, n_samples=state.n)]
        region_node = [0]
        cache: dict[int, Optional[SplitCandidate]] = {}
        active = [0]
        while self.max_splits is None or len(state.history) < self.max_splits:
            for b in active:
                cache[b] = evaluate_region_splits(state, b, self._draw_covariates(), self.min_leaf)
            best = select_best(cache.values())
            if best is None or best.score <= 0.0:
                break
            trial = state.try_split(best)
            if not (trial.decrease > required and trial.decrease > floor):
                break
            accept_split(state, best, trial)
            b, new = best.region, state.region_count - 1
            parent = region_node[b]
            left_id, right_id = len(nodes), len(nodes) + 1
            nodes.append(dict(node_id=left_id, parent=parent, n_samples=int(state.regions[new].size)))
            nodes.append(dict(node_id=right_id, parent=parent, n_samples=int(state.regions[b].size)))
            nodes[parent].update(left=left_id, right=right_id, covariate=best.covariate, threshold=best.threshold,
                                 loss_decrease=trial.decrease, order=len(state.history) - 1)
            region_node[b] = right_id
            region_node.append(left_id)
            self.history.append({"alpha": best.score, "decrease": trial.decrease})
            active = [b, new] if self.variant == "SDT1" else list(range(state.region_count))
        for column, node_id in enumerate(region_node):
            nodes[node_id]["value"] = float(state.levels[column])
        fit_data = None
        if retain_fit_data:
            gram, moment = state.leaf_gram()
            fit_data = FitProjection(leaf_ids=region_node, gram=gram.tolist(), moment=moment.tolist(), response_norm_sq=state.y_tilde_sq)
        logger.debug("tree grown: %d splits, loss %.6g -> %.6g", len(state.history), state.loss_init, state.loss)
        return SDTreeModel(
            nodes=[TreeNode(**node) for node in nodes],
            n_features=self.X.shape[1],
            n_samples=state.n,
            loss_init=state.loss_init,
            loss_final=max(state.loss, 0.0),
            cp=self.cp,
            max_splits=self.max_splits,
            mtry=self.mtry,
            variant=self.variant,
            min_leaf=self.min_leaf,
            max_candidates=self.max_candidates,
            seed=self.seed,
            transform_kind=self.transform_kind,
            fit_data=fit_data,
        )


def fit_sdtree(X, Y, transform: Union[SpectralTransform, np.ndarray], cp: float = 0.0, max_splits: Optional[int] = None,
               mtry: Optional[int] = None, variant: Variant = "SDT1", rng=None, min_leaf: int = 5, max_candidates: int = 100,
               retain_fit_data: bool = True) -> SDTreeModel:
    """
    Fit a spectrally deconfounded regression tree.

    Args:
        X: n x p covariates.
        Y: n responses.
        transform: spectral transform built on X, or a dense n x n operator.
        cp (float): minimum loss decrease relative to the single-leaf loss.
        max_splits (Optional[int]): maximum number of accepted splits.
        mtry (Optional[int]): covariates drawn per region evaluation (all when unset).
        variant: SDT1 re-scores only the two new regions, SDT2 re-scores every region.
        rng: seed or numpy Generator for covariate subsampling.
    Raises:
        ConfigError: For parameters outside their range.
        ShapeError: For mismatched dimensions.
    """
    grower = TreeGrower(X, Y, transform, cp=cp, max_splits=max_splits, mtry=mtry, variant=variant, rng=rng,
                        min_leaf=min_leaf, max_candidates=max_candidates)
    return grower.grow(retain_fit_data=retain_fit_data)


def leaf_index(model: SDTreeModel, X) -> np.ndarray:
    """Node id of the leaf reached by each row of X."""
    A = as_matrix(X)
    if A.shape[1] != model.n_features:
        raise ShapeError(f"X has {A.shape[1]} columns, the tree was fitted on {model.n_features}.")
    covariate, threshold, left, right, _ = model.routing_arrays()
    return route_to_leaves(A, covariate, threshold, left, right)


def predict_tree(model: SDTreeModel, X) -> np.ndarray:
    """Leaf level of the region containing each row of X."""
    *_, value = model.routing_arrays()
    return value[leaf_index(model, X)]


def tree_importance(model: SDTreeModel) -> np.ndarray:
    """Sum of recorded loss decreases per covariate."""
    importance = np.zeros(model.n_features)
    for node in model.internal_nodes():
        importance[node.covariate] += node.loss_decrease
    return importance


def prune(model: SDTreeModel, cp_new: float) -> SDTreeModel:
    """
    Collapse every internal node whose recorded decrease is at most cp_new times the initial loss.

    Leaf levels of the pruned tree are re-solved exactly when the model carries fit data;
    otherwise collapsed leaves take the sample-weighted mean of the levels they replace.

    Raises:
        ConfigError: If cp_new is negative.
    """
    if cp_new < 0:
        raise ConfigError(f"cp must be >= 0, got {cp_new}.")
    limit = cp_new * model.loss_init
    if all(node.loss_decrease > limit for node in model.internal_nodes()):
        return model

    old_to_new: dict[int, int] = {}
    kept: list[dict] = []
    collapsed_into: dict[int, int] = {}
    queue = [(0, None)]
    while queue:
        old_id, new_parent = queue.pop(0)
        node = model.nodes[old_id]
        new_id = len(kept)
        old_to_new[old_id] = new_id
        entry = node.model_dump(include={"n_samples", "value"})
        entry.update(node_id=new_id, parent=new_parent)
        kept.append(entry)
        if node.is_leaf:
            collapsed_into[old_id] = new_id
        elif node.loss_decrease <= limit:
            entry["value"] = None
            for leaf in _descendant_leaves(model, old_id):
                collapsed_into[leaf] = new_id
        else:
            entry.update(covariate=node.covariate, threshold=node.threshold, loss_decrease=node.loss_decrease, order=node.order,
                         value=None, left=-1, right=-1)
            queue.append((node.left, new_id))
            queue.append((node.right, new_id))
    for old_id, new_id in old_to_new.items():
        node = model.nodes[old_id]
        entry = kept[new_id]
        if entry.get("left") == -1:
            entry["left"] = old_to_new[node.left]
            entry["right"] = old_to_new[node.right]
    orders = sorted(e["order"] for e in kept if e.get("left") is not None)
    for entry in kept:
        if entry.get("left") is not None:
            entry["order"] = orders.index(entry["order"])

    new_leaves = sorted(set(collapsed_into.values()))
    fit_data, loss_final, approximate = None, None, False
    if model.fit_data is not None:
        old_leaves = model.fit_data.leaf_ids
        A = np.zeros((len(old_leaves), len(new_leaves)))
        for row, old_leaf in enumerate(old_leaves):
            A[row, new_leaves.index(collapsed_into[old_leaf])] = 1.0
        gram = A.T @ np.asarray(model.fit_data.gram) @ A
        moment = A.T @ np.asarray(model.fit_data.moment)
        levels = scipy.linalg.lstsq(gram, moment)[0]
        for column, leaf in enumerate(new_leaves):
            kept[leaf]["value"] = float(levels[column])
        loss_final = (model.fit_data.response_norm_sq - 2.0 * float(levels @ moment) + float(levels @ gram @ levels)) / model.n_samples
        fit_data = FitProjection(leaf_ids=new_leaves, gram=gram.tolist(), moment=moment.tolist(), response_norm_sq=model.fit_data.response_norm_sq)
    else:
        approximate = True
        for leaf in new_leaves:
            if kept[leaf]["value"] is None:
                members = [model.nodes[old] for old, new in collapsed_into.items() if new == leaf]
                weights = np.array([max(m.n_samples, 1) for m in members], dtype=float)
                kept[leaf]["value"] = float(np.average([m.value for m in members], weights=weights))
        loss_final = model.loss_init - sum(e["loss_decrease"] for e in kept if e.get("left") is not None)

    return model.model_copy(update={
        "nodes": [TreeNode(**entry) for entry in kept],
        "cp": max(model.cp, float(cp_new)),
        "loss_final": max(float(loss_final), 0.0),
        "fit_data": fit_data,
        "approximate_levels": model.approximate_levels or approximate,
    })


def _descendant_leaves(model: SDTreeModel, node_id: int) -> list[int]:
    leaves, stack = [], [node_id]
    while stack:
        node = model.nodes[stack.pop()]
        if node.is_leaf:
            leaves.append(node.node_id)
        else:
            stack.extend((node.left, node.right))
    return leaves
