from sdforest.forest.ensemble import fit_forest, oob_predict, predict_forest, tree_predictions
from sdforest.forest.forest_model import ForestConfig, ForestModel
from sdforest.forest.introspection import (PartialDependence, PathResult, default_grid, partial_dependence, regularization_paths,
                                           stability_paths, variable_importance)

__all__ = [
    "ForestConfig", "ForestModel", "PartialDependence", "PathResult", "default_grid", "fit_forest", "oob_predict",
    "partial_dependence", "predict_forest", "regularization_paths", "stability_paths", "tree_predictions", "variable_importance",
]
