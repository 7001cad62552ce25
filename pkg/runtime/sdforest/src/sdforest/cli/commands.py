"""
Commands working on data files and fitted models: fit, predict, paths, pdp, spectrum and simulate.
"""
import argparse
from pathlib import Path

import numpy as np
import pandas as pd

from sdforest.cli.arguments import add_forest_arguments, add_sim_arguments, float_list
from sdforest.cli.io_utils import make_meta, write_table
from sdforest.cli.settings import HARNESS_DEFAULTS, RunSettings, resolve_settings
from sdforest.com.decorator import exit_codes
from sdforest.com.errors import ShapeError
from sdforest.com.logging_utils import ProjectLogger
from sdforest.com.shared_helper import child_rng, fresh_seed
from sdforest.command_registry import model_command
from sdforest.forest import (ForestModel, default_grid, fit_forest, oob_predict, partial_dependence, predict_forest, regularization_paths,
                             stability_paths, variable_importance)
from sdforest.simgen import FourierF0, gen_linear, gen_nonlinear, transform_diagnostic
from sdforest.spectral import direction_spectrum, pca_transform, trim_transform
from sdforest.store import DatasetStore, ModelStore, read_sidecar, read_table

logger = ProjectLogger(__name__).get_logger()

DEFAULT_PATH_POINTS = 20


def resolved_seed(settings: RunSettings) -> int:
    """Configured seed, or a fresh one from OS entropy."""
    return settings.seed if settings.seed is not None else fresh_seed()


def load_forest(path) -> ForestModel:
    path = Path(path)
    return ModelStore(path.parent).get_forest(path.name)


def feature_labels(model: ForestModel) -> list[str]:
    return model.feature_names or [f"x{j + 1}" for j in range(model.n_features)]


def read_predictors(path, model: ForestModel):
    """Predictor table for a fitted model, columns selected by the model's feature names."""
    table = read_table(path, features=model.feature_names, exclude=("y", "f0"))
    if table.X.shape[1] != model.n_features:
        raise ShapeError(f"{path} has {table.X.shape[1]} predictor columns, the model expects {model.n_features}.")
    return table


# ------------------------
# fit / predict
# ------------------------


def _fit_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="training CSV with header")
    parser.add_argument("--response", default="y", help="response column (default: y)")
    parser.add_argument("--truth", default="f0", help="optional ground-truth column, excluded from predictors")
    parser.add_argument("--model-name", dest="model_name", default="model")
    add_forest_arguments(parser)


@model_command(arguments=_fit_arguments)
@exit_codes
def cmd_fit(args):
    """Fit a spectrally deconfounded forest on a CSV file."""
    settings = resolve_settings(args)
    seed = resolved_seed(settings)
    table = read_table(args.data, response=args.response, truth=args.truth)
    config = settings.forest.model_copy(update={"seed": seed})
    model = fit_forest(table.X, table.Y, config, n_jobs=settings.threads, feature_names=table.feature_names)
    ModelStore(settings.out_path).put_forest(model, args.model_name)

    meta = make_meta("fit", settings.echo(), seed)
    write_table(pd.DataFrame({"feature": table.feature_names, "importance": variable_importance(model)}), settings.out_path, "importance", meta)
    oob, covered = oob_predict(model, table.X)
    classical = config.transform.kind == "identity"
    report = {
        "n": table.X.shape[0],
        "p": table.X.shape[1],
        "n_trees": config.n_trees,
        "transform": config.transform.kind,
        "classical": classical,
        "oob_coverage": float(covered.mean()),
        "oob_mse": float(np.mean((table.Y[covered] - oob[covered]) ** 2)),
    }
    if table.truth is not None:
        report["oob_f_mse"] = float(np.mean((table.truth[covered] - oob[covered]) ** 2))
    if classical:
        logger.info("identity transform: model is the classical (unadjusted) forest")
    write_table(pd.DataFrame([report]), settings.out_path, "fit_report", meta)


def _predict_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True, help="forest JSON written by fit")
    parser.add_argument("--data", required=True, help="CSV with the model's predictor columns")
    parser.add_argument("--output", default="predictions", help="output table name")


@model_command(arguments=_predict_arguments)
@exit_codes
def cmd_predict(args):
    """Predict with a fitted forest."""
    settings = resolve_settings(args)
    model = load_forest(args.model)
    table = read_predictors(args.data, model)
    predictions = predict_forest(model, table.X)
    meta = make_meta("predict", {**settings.echo(), "model": str(args.model)}, model.config.seed)
    write_table(pd.DataFrame({"prediction": predictions}), settings.out_path, args.output, meta)


# ------------------------
# introspection
# ------------------------


def _paths_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True)
    parser.add_argument("--cp-grid", dest="cp_grid", type=float_list, default=None,
                        help="cp values; default 20 points from 0 to the largest recorded relative decrease")


def default_cp_grid(model: ForestModel, points: int = DEFAULT_PATH_POINTS) -> np.ndarray:
    """Evenly spaced cp values up to the largest split decrease relative to its tree's initial loss."""
    largest = max((node.loss_decrease / tree.loss_init for tree in model.trees if tree.loss_init > 0 for node in tree.internal_nodes()), default=0.0)
    return np.linspace(0.0, largest, points)


def _long_path(result, labels, column: str) -> pd.DataFrame:
    rows = [{"cp": cp, "feature": label, column: value}
            for cp, values in zip(result.cp_grid, result.values) for label, value in zip(labels, values)]
    return pd.DataFrame(rows, columns=["cp", "feature", column])


@model_command(arguments=_paths_arguments)
@exit_codes
def cmd_paths(args):
    """Regularization (importance) and stability paths over a cp grid."""
    settings = resolve_settings(args)
    model = load_forest(args.model)
    grid = np.asarray(args.cp_grid) if args.cp_grid is not None else default_cp_grid(model)
    labels = feature_labels(model)
    meta = make_meta("paths", {**settings.echo(), "model": str(args.model), "cp_grid": grid.tolist()}, model.config.seed)
    write_table(_long_path(regularization_paths(model, grid), labels, "importance"), settings.out_path, "importance_path", meta)
    write_table(_long_path(stability_paths(model, grid), labels, "selection_probability"), settings.out_path, "stability_path", meta)


def _pdp_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True)
    parser.add_argument("--data", required=True, help="reference CSV")
    parser.add_argument("--covariates", nargs="+", default=None, help="names or 0-based indices (default: all)")
    parser.add_argument("--grid-points", dest="grid_points", type=int, default=50)
    parser.add_argument("--individual", type=int, default=0, help="number of per-observation curves")
    parser.add_argument("--sidecar", default=None, help="dataset JSON with f0 coefficients (default: next to --data)")


def _covariate_indices(tokens, labels: list[str]) -> list[int]:
    if tokens is None:
        return list(range(len(labels)))
    indices = []
    for token in tokens:
        if token in labels:
            indices.append(labels.index(token))
        elif token.isdigit() and int(token) < len(labels):
            indices.append(int(token))
        else:
            raise ShapeError(f"Unknown covariate '{token}'.")
    return indices


def truth_curve(f0, label: str, grid: np.ndarray, estimate: np.ndarray) -> np.ndarray:
    """
    Analytic partial dependence of a Fourier f0 for the covariate named `label` (x1..xp naming).

    f0 is identified up to a constant, so the curve is shifted to the mean of the estimated curve.
    """
    j = int(label[1:]) - 1 if label.startswith("x") and label[1:].isdigit() else -1
    component = f0.component(f0.parents.index(j), grid) if j in f0.parents else np.zeros_like(grid)
    return component - component.mean() + estimate.mean()


@model_command(arguments=_pdp_arguments)
@exit_codes
def cmd_pdp(args):
    """Partial dependence curves of selected covariates."""
    settings = resolve_settings(args)
    seed = resolved_seed(settings)
    model = load_forest(args.model)
    table = read_predictors(args.data, model)
    labels = feature_labels(model)
    sidecar = read_sidecar(args.sidecar or Path(args.data).with_suffix(".json"))
    f0 = sidecar.f0 if sidecar is not None and isinstance(sidecar.f0, FourierF0) else None
    frames = []
    for j in _covariate_indices(args.covariates, labels):
        grid = default_grid(table.X, j, args.grid_points)
        result = partial_dependence(model, j, grid, table.X, n_individual=args.individual, rng=child_rng(seed, j))
        curves = {"mean": result.average}
        if result.individual is not None:
            curves.update({f"obs{row + 1}": curve for row, curve in zip(result.individual_rows, result.individual)})
        if f0 is not None:
            curves["truth"] = truth_curve(f0, labels[j], grid, result.average)
        for name, values in curves.items():
            frames.append(pd.DataFrame({"feature": labels[j], "curve": name, "grid_value": grid, "value": values}))
    meta = make_meta("pdp", {**settings.echo(), "model": str(args.model), "grid_points": args.grid_points, "individual": args.individual}, seed)
    write_table(pd.concat(frames, ignore_index=True), settings.out_path, "pdp", meta)


# ------------------------
# data
# ------------------------


def _spectrum_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--data", default=None, help="CSV of predictors; columns y and f0 are skipped")
    source.add_argument("--synthetic", action="store_true", help="draw X from the simulation settings (default)")
    add_sim_arguments(parser)
    add_forest_arguments(parser)


@model_command(arguments=_spectrum_arguments)
@exit_codes
def cmd_spectrum(args):
    """Singular values of X and of the trim- and pca-transformed X."""
    if args.data:
        settings = resolve_settings(args)
    else:
        settings = resolve_settings(args, default_preset="spectrum", base=HARNESS_DEFAULTS)
    seed = resolved_seed(settings)
    if args.data:
        X = read_table(args.data, exclude=("y", "f0")).X
        q_remove = settings.forest.transform.q_remove
    else:
        X = gen_linear(settings.sim, np.random.default_rng(seed)).X
        q_remove = settings.forest.transform.q_remove or settings.sim.q
    scale = settings.forest.transform.scale_columns
    d, trimmed = direction_spectrum(X, trim_transform(X, scale_columns=scale))
    _, pca = direction_spectrum(X, pca_transform(X, q_remove, scale_columns=scale))
    frame = pd.DataFrame({"index": np.arange(1, d.size + 1), "raw": d, "trim": trimmed, "pca": pca})
    meta = make_meta("spectrum", {**settings.echo(), "data": args.data, "q_remove": q_remove}, seed)
    write_table(frame, settings.out_path, "spectrum", meta)


def _simulate_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", choices=["linear", "nonlinear"], default="linear")
    parser.add_argument("--name", default="data", help="dataset file name (without extension)")
    add_sim_arguments(parser)


@model_command(arguments=_simulate_arguments)
@exit_codes
def cmd_simulate(args):
    """Generate a synthetic confounded dataset (CSV plus JSON sidecar)."""
    settings = resolve_settings(args, default_preset="nonlinear" if args.kind == "nonlinear" else None)
    seed = resolved_seed(settings)
    generate = gen_nonlinear if args.kind == "nonlinear" else gen_linear
    dataset = generate(settings.sim, np.random.default_rng(seed))
    DatasetStore(settings.out_path).put_dataset(dataset, args.name, seed)
    diagnostic = transform_diagnostic(dataset, trim_transform(dataset.X, scale_columns=settings.forest.transform.scale_columns))
    logger.info("corr(f0, Y) = %.4f, after trim transform %.4f", diagnostic.corr_raw, diagnostic.corr_transformed)
    meta = make_meta("simulate", {**settings.echo(), "kind": args.kind}, seed)
    write_table(pd.DataFrame([diagnostic.model_dump()]), settings.out_path, f"{args.name}_diagnostic", meta)
