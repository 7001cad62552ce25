"""Shared argparse argument groups; every default is None so unset flags never override lower layers."""
import argparse


def float_list(text: str) -> list[float]:
    try:
        return [float(token) for token in text.replace(",", " ").split()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got '{text}'") from e


def pair_list(text: str) -> list[tuple[int, int]]:
    pairs = []
    for token in text.replace(",", " ").split():
        n, _, p = token.partition("x")
        try:
            pairs.append((int(n), int(p)))
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"expected pairs like 100x100, got '{token}'") from e
    return pairs


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=None, help="worker threads (results do not depend on it)")
    parser.add_argument("--seed", type=int, default=None, help="master seed; drawn from OS entropy when unset")
    parser.add_argument("--out-dir", dest="out_dir", default=None, help="output directory (default: current directory)")
    parser.add_argument("--config", default=None, help="JSON5 settings file")
    parser.add_argument("--preset", default=None, help="named settings preset")
    parser.add_argument("--log-level", dest="log_level", default=None, help="DEBUG, INFO, WARNING or ERROR")


def add_forest_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("forest")
    group.add_argument("--n-trees", dest="n_trees", type=int, default=None)
    group.add_argument("--mtry", type=int, default=None, help="covariates per region evaluation (default floor(p/2))")
    group.add_argument("--cp", type=float, default=None, help="minimum loss decrease relative to the initial loss")
    group.add_argument("--transform", choices=["trim", "pca", "identity"], default=None, help="identity gives the classical forest")
    group.add_argument("--q-remove", dest="q_remove", type=int, default=None, help="directions removed by the pca transform")
    scaling = group.add_mutually_exclusive_group()
    scaling.add_argument("--scale-columns", dest="scale_columns", action="store_const", const=True, default=None,
                         help="standardize columns before the SVD (default for fit and predict workflows)")
    scaling.add_argument("--no-scale-columns", dest="scale_columns", action="store_const", const=False, default=None,
                         help="use raw columns (default for simulation experiments)")
    group.add_argument("--sample-size", dest="sample_size", type=int, default=None)
    group.add_argument("--no-bootstrap", dest="bootstrap", action="store_const", const=False, default=None)
    group.add_argument("--min-leaf", dest="min_leaf", type=int, default=None)
    group.add_argument("--max-splits", dest="max_splits", type=int, default=None)
    group.add_argument("--max-candidates", dest="max_candidates", type=int, default=None)
    group.add_argument("--variant", choices=["SDT1", "SDT2"], default=None)
    group.add_argument("--share-q", dest="share_q", action="store_const", const=True, default=None)


def add_sim_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("simulation")
    group.add_argument("--n", type=int, default=None)
    group.add_argument("--p", type=int, default=None)
    group.add_argument("--q", type=int, default=None)
    group.add_argument("--density", type=float, default=None)
    group.add_argument("--sigma-nu", dest="sigma_nu", type=float, default=None)
    group.add_argument("--n-parents", dest="n_parents", type=int, default=None)
    group.add_argument("--f0-kind", dest="f0_kind", choices=["fourier", "random_tree", "none"], default=None)


def add_experiment_arguments(parser: argparse.ArgumentParser) -> None:
    add_sim_arguments(parser)
    add_forest_arguments(parser)
    group = parser.add_argument_group("experiment")
    group.add_argument("--reps", type=int, default=None)
    group.add_argument("--n-test", dest="n_test", type=int, default=None)
    group.add_argument("--vary", choices=["n", "p", "q", "density"], default=None)
    group.add_argument("--values", type=float_list, default=None, help="e.g. '0,5,20'")
    group.add_argument("--tau-grid", dest="tau_grid", type=float_list, default=None, help="e.g. '0,0.5,1,2'")
    group.add_argument("--grid", dest="rate_grid", type=pair_list, default=None, help="(n, p) pairs, e.g. '100x100,200x200'")
    group.add_argument("--tree-cp", dest="tree_cp", type=float, default=None)
