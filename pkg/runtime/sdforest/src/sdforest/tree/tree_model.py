"""
Pydantic models for fitted spectrally deconfounded trees.

The JSON produced by `SDTreeModel.model_dump_json()` is the persisted tree schema:
a node list with parent links, split covariate, threshold, recorded loss decrease
and leaf levels, plus the fitting metadata.
"""
from typing import ClassVar, Literal, Optional

import numpy as np
from pydantic import Field, model_validator

from sdforest.com.base_model import ArrayModel, FrozenModel

Variant = Literal["SDT1", "SDT2"]


class TreeNode(FrozenModel):
    """
    One node of a fitted tree.

    Attributes:
        node_id (int): position of the node in SDTreeModel.nodes (root is 0).
        parent (Optional[int]): parent node id, None for the root.
        left (Optional[int]): child receiving rows with x[covariate] <= threshold.
        right (Optional[int]): child receiving rows with x[covariate] > threshold.
        covariate (Optional[int]): split covariate (internal nodes only).
        threshold (Optional[float]): split threshold (internal nodes only).
        loss_decrease (Optional[float]): realized decrease of the spectral loss when the split was accepted.
        order (Optional[int]): creation order of the split (0 for the first accepted split).
        value (Optional[float]): leaf level (leaves only).
        n_samples (int): training rows routed to the node.
    """
    node_id: int = Field(..., ge=0)
    parent: Optional[int] = None
    left: Optional[int] = None
    right: Optional[int] = None
    covariate: Optional[int] = None
    threshold: Optional[float] = None
    loss_decrease: Optional[float] = None
    order: Optional[int] = None
    value: Optional[float] = None
    n_samples: int = Field(default=0, ge=0)

    @property
    def is_leaf(self) -> bool:
        """True when the node has no children."""
        return self.left is None


class FitProjection(FrozenModel):
    """
    Least-squares data of the final partition, enough to re-solve leaf levels of any coarsening.

    Attributes:
        leaf_ids (list[int]): node id of each partition column.
        gram (list[list[float]]): (QP)^T (QP) over the partition columns.
        moment (list[float]): (QP)^T QY.
        response_norm_sq (float): ||QY||^2.
    """
    leaf_ids: list[int]
    gram: list[list[float]]
    moment: list[float]
    response_norm_sq: float


class SDTreeModel(FrozenModel):
    """
    Fitted spectrally deconfounded regression tree.

    Class Attributes:
        SCHEMA_VERSION (str): version of the JSON layout.
    """
    SCHEMA_VERSION: ClassVar[str] = "1"

    schema_version: str = Field(default="1", description="Tree JSON schema version")
    nodes: list[TreeNode]
    n_features: int = Field(..., ge=1)
    n_samples: int = Field(..., ge=1)
    loss_init: float = Field(..., ge=0.0, description="Spectral loss of the single-leaf fit")
    loss_final: float = Field(..., ge=0.0, description="Spectral loss of the returned partition")
    cp: float = Field(default=0.0, ge=0.0)
    max_splits: Optional[int] = Field(default=None, ge=1)
    mtry: int = Field(..., ge=1)
    variant: Variant = "SDT1"
    min_leaf: int = Field(default=5, ge=1)
    max_candidates: int = Field(default=100, ge=1)
    seed: Optional[int] = None
    transform_kind: str = "trim"
    approximate_levels: bool = Field(default=False, description="Leaf levels merged by sample counts after pruning without fit data")
    fit_data: Optional[FitProjection] = None

    @model_validator(mode="after")
    def _check_structure(self):
        for position, node in enumerate(self.nodes):
            if node.node_id != position:
                raise ValueError(f"node at position {position} has id {node.node_id}")
            if (node.left is None) != (node.right is None):
                raise ValueError(f"node {position} must have zero or two children")
        return self

    @property
    def leaf_count(self) -> int:
        """Number of leaves."""
        return sum(1 for node in self.nodes if node.is_leaf)

    def internal_nodes(self) -> list[TreeNode]:
        """Internal nodes in creation order."""
        return sorted((node for node in self.nodes if not node.is_leaf), key=lambda node: node.order)

    def routing_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Array view (covariate, threshold, left, right, value) used for vectorized routing."""
        size = len(self.nodes)
        covariate = np.zeros(size, dtype=np.int64)
        threshold = np.zeros(size)
        left = np.full(size, -1, dtype=np.int64)
        right = np.full(size, -1, dtype=np.int64)
        value = np.zeros(size)
        for node in self.nodes:
            if node.is_leaf:
                value[node.node_id] = node.value if node.value is not None else 0.0
            else:
                covariate[node.node_id] = node.covariate
                threshold[node.node_id] = node.threshold
                left[node.node_id] = node.left
                right[node.node_id] = node.right
        return covariate, threshold, left, right, value


class SplitCandidate(ArrayModel):
    """
    Best split found for one region.

    Attributes:
        region (int): partition column b.
        covariate (int): split covariate j.
        threshold (float): split point s; rows with x_j <= s form the indicator e.
        left_index (np.ndarray): sample indices where e is 1.
        score (float): alpha(e) = (u(e)^T QY)^2, 0 for directions already in the span.
        region_version (int): version of region b when the candidate was scored.
    """
    region: int
    covariate: int
    threshold: float
    left_index: np.ndarray
    score: float = Field(..., ge=0.0)
    region_version: int = 0


class SplitTrial(ArrayModel):
    """Refit of the partition with a candidate split applied (not yet committed)."""
    candidate: SplitCandidate
    p_tilde: np.ndarray
    basis_vector: Optional[np.ndarray] = None
    levels: np.ndarray
    loss: float
    decrease: float


class AcceptedSplit(ArrayModel):
    """Record of a committed split."""
    region: int
    new_region: int
    covariate: int
    threshold: float
    score: float
    decrease: float


def route_to_leaves(X: np.ndarray, covariate: np.ndarray, threshold: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """
    Node index reached by every row of X; rows with x_j equal to the threshold go left.

    Args:
        X (np.ndarray): m x p matrix.
        covariate, threshold, left, right (np.ndarray): per-node arrays, -1 children mark leaves.
    Returns:
        np.ndarray: m leaf node indices.
    """
    current = np.zeros(X.shape[0], dtype=np.int64)
    for _ in range(len(left)):
        rows = np.flatnonzero(left[current] >= 0)
        if rows.size == 0:
            break
        nodes = current[rows]
        go_left = X[rows, covariate[nodes]] <= threshold[nodes]
        current[rows] = np.where(go_left, left[nodes], right[nodes])
    return current
