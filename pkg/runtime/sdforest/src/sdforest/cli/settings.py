"""
Run settings of the command-line interface.

Settings are assembled from layers, later ones winning:
model defaults < command defaults < named preset < config file (JSON5) < command-line flags.
"""
import argparse
import copy
from pathlib import Path
from typing import Any, Literal, Optional

import json5
from pydantic import Field, model_validator

from sdforest.com.base_model import StrictModel
from sdforest.com.errors import ConfigError
from sdforest.forest.forest_model import ForestConfig
from sdforest.simgen.sim_model import SimSpec

PRESETS: dict[str, dict[str, Any]] = {
    "screening": {
        "sim": {"n": 1000, "p": 500, "q": 20},
        "forest": {"n_trees": 100},
    },
    "full": {
        "sim": {"n": 500, "p": 500, "q": 20},
        "forest": {"n_trees": 100},
        "experiment": {"reps": 200},
    },
    "desk": {
        "sim": {"n": 300, "p": 300, "q": 20},
        "forest": {"n_trees": 50},
        "experiment": {"reps": 20},
    },
    "nonlinear": {
        "sim": dict(SimSpec.NONLINEAR_DEFAULTS),
        "forest": {"n_trees": 50},
        "experiment": {"reps": 20},
    },
    "random-tree": {
        "sim": {"n": 300, "p": 300, "q": 20, "f0_kind": "random_tree"},
        "experiment": {"reps": 50, "tree_cp": 0.01},
    },
    "spectrum": {
        "sim": {"n": 1000, "p": 100, "q": 20},
    },
}

# alternative names accepted by --preset
PRESET_ALIASES: dict[str, str] = {
    "fig6": "full",
    "appendixA": "random-tree",
}

# lowest layer of the simulation experiments: raw simulated columns enter the SVD unscaled
HARNESS_DEFAULTS: dict[str, Any] = {
    "forest": {"transform": {"scale_columns": False}},
}

# argparse dest -> path inside RunSettings
FLAG_PATHS: dict[str, tuple[str, ...]] = {
    "seed": ("seed",),
    "threads": ("threads",),
    "out_dir": ("out_dir",),
    "n": ("sim", "n"),
    "p": ("sim", "p"),
    "q": ("sim", "q"),
    "density": ("sim", "density"),
    "sigma_nu": ("sim", "sigma_nu"),
    "n_parents": ("sim", "n_parents"),
    "f0_kind": ("sim", "f0_kind"),
    "n_trees": ("forest", "n_trees"),
    "mtry": ("forest", "mtry"),
    "cp": ("forest", "cp"),
    "transform": ("forest", "transform", "kind"),
    "q_remove": ("forest", "transform", "q_remove"),
    "scale_columns": ("forest", "transform", "scale_columns"),
    "sample_size": ("forest", "sample_size"),
    "min_leaf": ("forest", "min_leaf"),
    "max_splits": ("forest", "max_splits"),
    "max_candidates": ("forest", "max_candidates"),
    "variant": ("forest", "variant"),
    "share_q": ("forest", "share_q"),
    "bootstrap": ("forest", "bootstrap"),
    "reps": ("experiment", "reps"),
    "n_test": ("experiment", "n_test"),
    "vary": ("experiment", "vary"),
    "values": ("experiment", "values"),
    "tau_grid": ("experiment", "tau_grid"),
    "rate_grid": ("experiment", "rate_grid"),
    "tree_cp": ("experiment", "tree_cp"),
}


class ExperimentOptions(StrictModel):
    """
    Replicate counts and grids of the experiment commands.

    Attributes:
        reps (int): replicates per grid value.
        n_test (int): fresh test points for f_mse.
        vary (str): simulation parameter varied by bench-dims.
        values (list[float]): values of the varied parameter (default: the configured value only).
        tau_grid (list[float]): perturbation strengths of bench-perturb.
        rate_grid (list[tuple[int, int]]): (n, p) pairs of rate-check.
        tree_cp (float): cp of the single trees in variant-study.
    """
    reps: int = Field(default=20, ge=1)
    n_test: int = Field(default=500, ge=1)
    vary: Literal["n", "p", "q", "density"] = "q"
    values: list[float] = Field(default_factory=list)
    tau_grid: list[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0])
    rate_grid: list[tuple[int, int]] = Field(default_factory=lambda: [(100, 100), (200, 200), (400, 400)])
    tree_cp: float = Field(default=0.01, ge=0.0)

    @model_validator(mode="after")
    def _check_grids(self):
        if any(tau < 0 for tau in self.tau_grid):
            raise ValueError("tau_grid values must be >= 0")
        if any(n < 2 or p < 2 for n, p in self.rate_grid):
            raise ValueError("rate_grid needs n >= 2 and p >= 2")
        return self


class RunSettings(StrictModel):
    """Complete settings of one command invocation."""
    seed: Optional[int] = Field(default=None, ge=0)
    threads: int = Field(default=1, ge=1)
    out_dir: str = "."
    sim: SimSpec = Field(default_factory=SimSpec)
    forest: ForestConfig = Field(default_factory=ForestConfig)
    experiment: ExperimentOptions = Field(default_factory=ExperimentOptions)

    def echo(self) -> dict:
        """Settings written to output sidecars (worker count and output location excluded)."""
        return self.model_dump(mode="json", exclude={"threads", "out_dir"})

    @property
    def out_path(self) -> Path:
        return Path(self.out_dir)


def deep_merge(base: dict, override: dict) -> dict:
    """Recursively merge override into a copy of base."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config_file(path) -> dict:
    """
    Load a JSON5 settings file.

    Raises:
        ConfigError: If the file cannot be read or is not a JSON5 object.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json5.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    except ValueError as e:
        raise ConfigError(f"Config file {path} is not valid JSON5: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain an object.")
    return data


def flag_overrides(args: argparse.Namespace) -> dict:
    """Nested settings dict of every flag given on the command line."""
    overrides: dict = {}
    for dest, path in FLAG_PATHS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        node = overrides
        for key in path[:-1]:
            node = node.setdefault(key, {})
        node[path[-1]] = value
    return overrides


def resolve_settings(args: argparse.Namespace, default_preset: Optional[str] = None, base: Optional[dict] = None) -> RunSettings:
    """
    Merge preset, config file and flags into validated RunSettings.

    Args:
        args: parsed command line.
        default_preset: preset used when --preset is not given.
        base: command-specific defaults applied below the preset.

    Raises:
        ConfigError: For an unknown preset or unreadable config file.
        ValidationError: For values outside their admissible range.
    """
    layers: dict = copy.deepcopy(base) if base else {}
    preset = getattr(args, "preset", None) or default_preset
    if preset is not None:
        preset = PRESET_ALIASES.get(preset, preset)
        if preset not in PRESETS:
            known = sorted([*PRESETS, *PRESET_ALIASES])
            raise ConfigError(f"Unknown preset '{preset}'; available: {', '.join(known)}.")
        layers = deep_merge(layers, PRESETS[preset])
    if getattr(args, "config", None):
        layers = deep_merge(layers, load_config_file(args.config))
    layers = deep_merge(layers, flag_overrides(args))
    return RunSettings.model_validate(layers)
