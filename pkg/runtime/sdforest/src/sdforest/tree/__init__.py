from sdforest.tree.partition_state import PartitionState, accept_split, evaluate_region_splits
from sdforest.tree.sdtree import TreeGrower, fit_sdtree, leaf_index, predict_tree, prune, select_best, tree_importance
from sdforest.tree.tree_model import FitProjection, SDTreeModel, SplitCandidate, TreeNode, route_to_leaves

__all__ = [
    "FitProjection", "PartitionState", "SDTreeModel", "SplitCandidate", "TreeGrower", "TreeNode",
    "accept_split", "evaluate_region_splits", "fit_sdtree", "leaf_index", "predict_tree", "prune",
    "route_to_leaves", "select_best", "tree_importance",
]
