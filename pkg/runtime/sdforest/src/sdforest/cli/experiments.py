"""
Simulation experiments: dimension benchmarks, dense-perturbation robustness, nonlinear confounding,
the convergence-rate diagnostic and the SDT1/SDT2 comparison.

Each experiment is split into independent tasks seeded by derive_seed(seed, ...). Tasks run on a thread
pool and their records are written in task order, so outputs do not depend on the worker count.
Wall times go to a separate timings table.
"""
import argparse
import math
import time
from typing import Callable, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import Field

from sdforest.cli.arguments import add_experiment_arguments
from sdforest.cli.commands import resolved_seed
from sdforest.cli.io_utils import make_meta, write_table
from sdforest.cli.settings import HARNESS_DEFAULTS, RunSettings, resolve_settings
from sdforest.com.base_model import FrozenModel
from sdforest.com.decorator import exit_codes
from sdforest.com.logging_utils import ProjectLogger
from sdforest.com.shared_helper import derive_seed
from sdforest.command_registry import experiment_command
from sdforest.forest import ForestConfig, fit_forest, oob_predict, predict_forest, variable_importance
from sdforest.simgen import SimSpec, draw_nonlinear_process, draw_process, gen_linear, perturb_dense
from sdforest.spectral import TransformOptions, apply, trim_transform
from sdforest.store import read_table
from sdforest.tree import fit_sdtree, predict_tree

logger = ProjectLogger(__name__).get_logger()

METHODS = ("sdforest", "classical")


class ExperimentRecord(FrozenModel):
    """
    One result row: a method evaluated on one replicate at one value of the varied parameter.

    Attributes:
        metric (str): f_mse, prediction_change, discrepancy or gap.
        score (float): value of the metric (>= 0).
        details (dict[str, float]): extra per-row quantities written as additional columns.
    """
    experiment: str
    method: str
    parameter: str
    value: float
    replicate: int = Field(..., ge=0)
    seed: int
    metric: str
    score: float = Field(..., ge=0.0)
    details: dict[str, float] = Field(default_factory=dict)

    def row(self) -> dict:
        base = self.model_dump(exclude={"details"})
        base.update(self.details)
        return base


class TaskTiming(FrozenModel):
    experiment: str
    method: str
    value: float
    replicate: int
    seconds: float


TaskResult = tuple[list[ExperimentRecord], list[TaskTiming]]


def method_configs(config: ForestConfig, seed: int) -> dict[str, ForestConfig]:
    """The configured forest and its classical (identity transform) counterpart, sharing one seed."""
    sdforest = config.model_copy(update={"seed": seed})
    classical = sdforest.model_copy(update={"transform": TransformOptions(kind="identity")})
    return {"sdforest": sdforest, "classical": classical}


def f_mse(truth: np.ndarray, estimate: np.ndarray) -> float:
    return float(np.mean((truth - estimate) ** 2))


def parent_rank(importance: np.ndarray, parents: list[int]) -> Optional[int]:
    """1-based rank (by decreasing importance) of the best-ranked causal parent."""
    if not parents:
        return None
    order = np.argsort(-importance, kind="stable")
    ranks = np.empty(order.size, dtype=np.int64)
    ranks[order] = np.arange(1, order.size + 1)
    return int(ranks[parents].min())


def run_tasks(task: Callable[..., TaskResult], arguments: list[tuple], n_jobs: int) -> TaskResult:
    """Run tasks on a thread pool and concatenate their results in task order."""
    results = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(task)(*args) for args in arguments)
    records = [record for task_records, _ in results for record in task_records]
    timings = [timing for _, task_timings in results for timing in task_timings]
    return records, timings


def compare_methods(experiment: str, parameter: str, value: float, replicate: int, forest_seed: int,
                    config: ForestConfig, train, test) -> TaskResult:
    """Fit both methods on train and score f_mse on test."""
    records, timings = [], []
    for method, method_config in method_configs(config, forest_seed).items():
        started = time.perf_counter()
        model = fit_forest(train.X, train.Y, method_config)
        score = f_mse(test.f0_values, predict_forest(model, test.X))
        timings.append(TaskTiming(experiment=experiment, method=method, value=value, replicate=replicate, seconds=time.perf_counter() - started))
        rank = parent_rank(variable_importance(model), train.parents)
        details = {} if rank is None else {"parent_rank": float(rank)}
        records.append(ExperimentRecord(experiment=experiment, method=method, parameter=parameter, value=value, replicate=replicate,
                                        seed=forest_seed, metric="f_mse", score=score, details=details))
    return records, timings


# ------------------------
# bench-dims / bench-nonlinear
# ------------------------


def varied_spec(sim: SimSpec, parameter: str, value: float) -> SimSpec:
    """Copy of sim with one parameter replaced (validated)."""
    cast = float(value) if parameter == "density" else int(round(value))
    return SimSpec.model_validate({**sim.model_dump(), parameter: cast})


def _bench_dims_task(settings: RunSettings, seed: int, value_idx: int, value: float, rep: int) -> TaskResult:
    task_seed = derive_seed(seed, value_idx, rep)
    spec = varied_spec(settings.sim, settings.experiment.vary, value)
    rng = np.random.default_rng(task_seed)
    process = draw_process(spec, rng)
    train = process.sample(spec.n, rng)
    test = process.sample(settings.experiment.n_test, rng)
    return compare_methods("bench_dims", settings.experiment.vary, float(value), rep, derive_seed(task_seed, 1), settings.forest, train, test)


def run_bench_dims(settings: RunSettings, seed: int) -> TaskResult:
    """For each value of the varied parameter and replicate: redraw the process, fit both methods, score f_mse."""
    values = settings.experiment.values or [float(getattr(settings.sim, settings.experiment.vary))]
    tasks = [(settings, seed, i, value, rep) for i, value in enumerate(values) for rep in range(settings.experiment.reps)]
    return run_tasks(_bench_dims_task, tasks, settings.threads)


def _bench_nonlinear_task(settings: RunSettings, seed: int, rep: int) -> TaskResult:
    task_seed = derive_seed(seed, rep)
    rng = np.random.default_rng(task_seed)
    process = draw_nonlinear_process(settings.sim, rng)
    train = process.sample(settings.sim.n, rng)
    test = process.sample(settings.experiment.n_test, rng)
    return compare_methods("bench_nonlinear", "nonlinear_terms", float(settings.sim.nonlinear_terms), rep, derive_seed(task_seed, 1),
                           settings.forest, train, test)


def run_bench_nonlinear(settings: RunSettings, seed: int) -> TaskResult:
    """Both methods on data with nonlinear confounding."""
    return run_tasks(_bench_nonlinear_task, [(settings, seed, rep) for rep in range(settings.experiment.reps)], settings.threads)


# ------------------------
# bench-perturb
# ------------------------


def _mean_change(current: np.ndarray, base: np.ndarray) -> float:
    both = np.isfinite(current) & np.isfinite(base)
    return float(np.mean((current[both] - base[both]) ** 2)) if both.any() else 0.0


def _perturb_task(settings: RunSettings, seed: int, X: np.ndarray, Y: np.ndarray, rep: int) -> TaskResult:
    forest_seed = derive_seed(seed, rep, 1)
    configs = method_configs(settings.forest, forest_seed)
    records, timings = [], []
    base = {}
    for method, config in configs.items():
        started = time.perf_counter()
        base[method] = oob_predict(fit_forest(X, Y, config), X)[0]
        timings.append(TaskTiming(experiment="bench_perturb", method=method, value=0.0, replicate=rep, seconds=time.perf_counter() - started))
    draws = None
    for tau in settings.experiment.tau_grid:
        X_tau, Y_tau, draws = perturb_dense(X, Y, tau, np.random.default_rng(derive_seed(seed, rep, 0)), draws)
        for method, config in configs.items():
            if tau == 0.0:
                current = base[method]
            else:
                started = time.perf_counter()
                current = oob_predict(fit_forest(X_tau, Y_tau, config), X_tau)[0]
                timings.append(TaskTiming(experiment="bench_perturb", method=method, value=tau, replicate=rep, seconds=time.perf_counter() - started))
            records.append(ExperimentRecord(experiment="bench_perturb", method=method, parameter="tau", value=tau, replicate=rep,
                                            seed=forest_seed, metric="prediction_change", score=_mean_change(current, base[method])))
    records.append(ExperimentRecord(experiment="bench_perturb", method="discrepancy", parameter="tau", value=0.0, replicate=rep,
                                    seed=forest_seed, metric="discrepancy", score=_mean_change(base["sdforest"], base["classical"])))
    return records, timings


def run_bench_perturb(settings: RunSettings, seed: int, X: Optional[np.ndarray] = None, Y: Optional[np.ndarray] = None) -> TaskResult:
    """
    Prediction change ||f_tau(X_tau) - f_0(X)||^2 / n of out-of-bag predictions under a synthetic dense confounder.

    The base data are fixed; every replicate draws one (H, Gamma, delta) reused along the tau grid.
    Without data, a synthetic base dataset is drawn from settings.sim.
    """
    if X is None:
        dataset = gen_linear(settings.sim, np.random.default_rng(derive_seed(seed)))
        X, Y = dataset.X, dataset.Y
    tasks = [(settings, seed, X, Y, rep) for rep in range(settings.experiment.reps)]
    return run_tasks(_perturb_task, tasks, settings.threads)


# ------------------------
# rate-check
# ------------------------


def confounding_gap(dataset, scale_columns: bool = True) -> float:
    """|(||Q(H delta + nu)|| - ||Q nu||)| / sqrt(n), the loss difference at f = f0 caused by confounding."""
    transform = trim_transform(dataset.X, scale_columns=scale_columns)
    n = dataset.X.shape[0]
    with_confounding = np.linalg.norm(apply(transform, dataset.confounding + dataset.nu))
    without = np.linalg.norm(apply(transform, dataset.nu))
    return float(abs(with_confounding - without) / math.sqrt(n))


def _rate_task(settings: RunSettings, seed: int, grid_idx: int, n: int, p: int, rep: int) -> TaskResult:
    task_seed = derive_seed(seed, grid_idx, rep)
    spec = SimSpec.model_validate({**settings.sim.model_dump(), "n": n, "p": p, "n_parents": min(settings.sim.n_parents, p)})
    started = time.perf_counter()
    gap = confounding_gap(gen_linear(spec, np.random.default_rng(task_seed)), settings.forest.transform.scale_columns)
    scale = min(math.sqrt(n), math.sqrt(p))
    record = ExperimentRecord(experiment="rate_check", method="trim", parameter="min_np", value=float(min(n, p)),
                              replicate=rep, seed=task_seed, metric="gap", score=gap,
                              details={"n": float(n), "p": float(p), "normalized_gap": gap * scale})
    timing = TaskTiming(experiment="rate_check", method="trim", value=float(min(n, p)), replicate=rep, seconds=time.perf_counter() - started)
    return [record], [timing]


def run_rate_check(settings: RunSettings, seed: int) -> TaskResult:
    """Confounding gap of the trim-transformed loss over a grid of (n, p)."""
    tasks = [(settings, seed, i, n, p, rep) for i, (n, p) in enumerate(settings.experiment.rate_grid) for rep in range(settings.experiment.reps)]
    return run_tasks(_rate_task, tasks, settings.threads)


# ------------------------
# variant-study
# ------------------------


def _variant_task(settings: RunSettings, seed: int, rep: int) -> TaskResult:
    task_seed = derive_seed(seed, rep)
    rng = np.random.default_rng(task_seed)
    process = draw_process(settings.sim, rng)
    train = process.sample(settings.sim.n, rng)
    test = process.sample(settings.experiment.n_test, rng)
    transform = trim_transform(train.X, scale_columns=settings.forest.transform.scale_columns)
    records, timings = [], []
    for variant in ("SDT1", "SDT2"):
        started = time.perf_counter()
        tree = fit_sdtree(train.X, train.Y, transform, cp=settings.experiment.tree_cp, variant=variant, rng=task_seed,
                          min_leaf=settings.forest.min_leaf, max_candidates=settings.forest.max_candidates, retain_fit_data=False)
        score = f_mse(test.f0_values, predict_tree(tree, test.X))
        timings.append(TaskTiming(experiment="variant_study", method=variant, value=settings.experiment.tree_cp, replicate=rep,
                                  seconds=time.perf_counter() - started))
        records.append(ExperimentRecord(experiment="variant_study", method=variant, parameter="cp", value=settings.experiment.tree_cp,
                                        replicate=rep, seed=task_seed, metric="f_mse", score=score,
                                        details={"train_loss": tree.loss_final, "leaves": float(tree.leaf_count)}))
    return records, timings


def run_variant_study(settings: RunSettings, seed: int) -> TaskResult:
    """Single trees grown with SDT1 and SDT2 on the same data and transform."""
    return run_tasks(_variant_task, [(settings, seed, rep) for rep in range(settings.experiment.reps)], settings.threads)


# ------------------------
# output
# ------------------------


def records_frame(records: list[ExperimentRecord]) -> pd.DataFrame:
    return pd.DataFrame([record.row() for record in records])


def summarize(records: list[ExperimentRecord]) -> pd.DataFrame:
    """Median of the score and of every numeric detail per (method, value, metric)."""
    frame = records_frame(records).drop(columns=["replicate", "seed"])
    keys = ["experiment", "method", "parameter", "value", "metric"]
    summary = frame.groupby(keys, sort=True).median(numeric_only=True).reset_index()
    counts = frame.groupby(keys, sort=True).size().reset_index(name="replicates")
    return summary.merge(counts, on=keys)


def write_experiment(name: str, records: list[ExperimentRecord], timings: list[TaskTiming], settings: RunSettings, seed: int) -> None:
    meta = make_meta(name, settings.echo(), seed)
    out = settings.out_path
    write_table(records_frame(records), out, name, meta)
    write_table(summarize(records), out, f"{name}_summary", meta)
    write_table(pd.DataFrame([timing.model_dump() for timing in timings]), out, f"{name}_timings", meta)


def _experiment(name: str, runner: Callable[[RunSettings, int], TaskResult], args, default_preset: Optional[str] = None,
                base: Optional[dict] = HARNESS_DEFAULTS) -> None:
    settings = resolve_settings(args, default_preset=default_preset, base=base)
    seed = resolved_seed(settings)
    logger.info("%s: seed=%d reps=%d threads=%d", name, seed, settings.experiment.reps, settings.threads)
    records, timings = runner(settings, seed)
    write_experiment(name, records, timings, settings, seed)


# ------------------------
# commands
# ------------------------


@experiment_command(arguments=add_experiment_arguments)
@exit_codes
def cmd_bench_dims(args):
    """f_mse of SDForest and the classical forest while varying n, p, q or the confounding density."""
    _experiment("bench_dims", run_bench_dims, args)


def _perturb_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--data", default=None, help="base data CSV")
    source.add_argument("--synthetic", action="store_true", help="draw the base data from the simulation settings (default)")
    parser.add_argument("--response", default="y")
    add_experiment_arguments(parser)


@experiment_command(arguments=_perturb_arguments)
@exit_codes
def cmd_bench_perturb(args):
    """Change of out-of-bag predictions under an added dense confounder, over a tau grid."""
    if args.data:
        table = read_table(args.data, response=args.response, exclude=("f0",))
        _experiment("bench_perturb", lambda settings, seed: run_bench_perturb(settings, seed, table.X, table.Y), args, base=None)
    else:
        _experiment("bench_perturb", run_bench_perturb, args)


@experiment_command(arguments=add_experiment_arguments)
@exit_codes
def cmd_bench_nonlinear(args):
    """f_mse of both methods under nonlinear confounding."""
    _experiment("bench_nonlinear", run_bench_nonlinear, args, default_preset="nonlinear")


@experiment_command(arguments=add_experiment_arguments)
@exit_codes
def cmd_rate_check(args):
    """Confounding gap of the spectral loss and its scaling with min(sqrt(n), sqrt(p))."""
    _experiment("rate_check", run_rate_check, args)


@experiment_command(arguments=add_experiment_arguments)
@exit_codes
def cmd_variant_study(args):
    """SDT1 versus SDT2 single trees on random-tree data."""
    _experiment("variant_study", run_variant_study, args, default_preset="random-tree")
