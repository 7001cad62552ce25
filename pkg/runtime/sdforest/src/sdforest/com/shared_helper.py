"""Utilities for seeding, array validation and build metadata."""

import subprocess
from functools import lru_cache

import numpy as np

from sdforest.com.errors import NonFiniteInputError, ShapeError


def derive_seed(seed: int, *keys: int) -> int:
    """ Derive a 32-bit child seed from a master seed and integer keys (tree index, replicate, ...). """
    return int(np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1)[0])


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """ Independent random stream for (seed, keys); identical across processes and worker counts. """
    return np.random.default_rng([int(seed), *map(int, keys)])


def fresh_seed() -> int:
    """ Draw a master seed from OS entropy (used when no seed is configured). """
    return int(np.random.SeedSequence().generate_state(1)[0])


def as_matrix(X, name: str = "X") -> np.ndarray:
    """ Convert to a finite float64 2-d array or raise. """
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional, got shape {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(f"{name} contains NaN or infinite entries.")
    return arr


def as_vector(y, n: int | None = None, name: str = "Y") -> np.ndarray:
    """ Convert to a finite float64 1-d array, optionally checking its length. """
    arr = np.asarray(y, dtype=float).reshape(-1) if np.ndim(y) <= 1 else np.asarray(y, dtype=float)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-dimensional, got shape {arr.shape}.")
    if n is not None and arr.shape[0] != n:
        raise ShapeError(f"{name} has length {arr.shape[0]}, expected {n}.")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(f"{name} contains NaN or infinite entries.")
    return arr


@lru_cache(maxsize=1)
def git_describe() -> str:
    """ Return `git describe --always --dirty` of the working tree, or 'unknown'. """
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], capture_output=True, text=True, timeout=5, check=False)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"
