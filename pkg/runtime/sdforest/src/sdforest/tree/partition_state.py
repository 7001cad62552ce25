"""
Incremental least-squares state of a growing partition.

The state keeps, for the current partition P with M regions:
  - QP (n x M) and the fitted levels c minimizing ||QY - QP c||^2,
  - an orthonormal basis U of span(QP),
  - the deflated operator (I - U U^T) Q used to score candidate indicators.

Scoring a candidate indicator e needs the component of Q e orthogonal to span(QP);
it is read off the deflated operator without refitting the partition.
"""
from typing import Iterable, Optional

import numpy as np
import scipy.linalg

from sdforest.com.errors import ConsistencyError, ShapeError
from sdforest.com.logging_utils import ProjectLogger
from sdforest.tree.tree_model import AcceptedSplit, SplitCandidate, SplitTrial

logger = ProjectLogger(__name__).get_logger()

BASIS_TOL = 1e-10
TIE_RTOL = 1e-10


def is_near_tie(score: float, best: float) -> bool:
    """True when score is within the relative tie tolerance of the best score."""
    return score >= best - TIE_RTOL * abs(best)


def candidate_boundaries(sorted_values: np.ndarray, min_leaf: int, max_candidates: int) -> np.ndarray:
    """
    Left-side counts k of the admissible splits of a sorted region column.

    A boundary k splits between sorted_values[k - 1] and sorted_values[k]; only boundaries between
    distinct values qualify. With more than max_candidates distinct values, max_candidates boundaries
    are kept at evenly spaced empirical quantiles.
    """
    m = sorted_values.shape[0]
    boundaries = np.flatnonzero(sorted_values[1:] > sorted_values[:-1]) + 1
    if boundaries.size + 1 > max_candidates:
        keep = np.unique(np.round(np.linspace(0, boundaries.size - 1, max_candidates)).astype(np.int64))
        boundaries = boundaries[keep]
    return boundaries[(boundaries >= min_leaf) & (boundaries <= m - min_leaf)]


class PartitionState:
    """
    Mutable fitting state of one tree.

    Args:
        X (np.ndarray): n x p training covariates.
        Y (np.ndarray): n responses.
        Q (np.ndarray): dense symmetric n x n spectral transform.
        max_candidates (int): candidate thresholds per covariate and region.
    """

    def __init__(self, X: np.ndarray, Y: np.ndarray, Q: np.ndarray, max_candidates: int = 100):
        n = X.shape[0]
        if Q.shape != (n, n) or Y.shape != (n,):
            raise ShapeError(f"Q {Q.shape} and Y {Y.shape} do not match {n} rows of X.")
        self.X = X
        self.Q = Q
        self.n = n
        self.max_candidates = max_candidates
        self.y_tilde = Q @ Y
        self.y_tilde_sq = float(self.y_tilde @ self.y_tilde)
        self.regions: list[np.ndarray] = [np.arange(n)]
        self.region_version: list[int] = [0]
        self.p_tilde = Q.sum(axis=1)[:, None]
        self.basis = np.zeros((n, 0))
        self.q_deflated = Q.copy()
        self.history: list[AcceptedSplit] = []
        first = self._orthogonalize(self.p_tilde[:, 0])
        if first is not None:
            self._deflate(first)
        self.levels = self.solve_levels(self.p_tilde, self.basis)
        self.loss_init = self.loss = self.spectral_loss(self.p_tilde, self.levels)
        self._projection = None

    @property
    def region_count(self) -> int:
        return len(self.regions)

    def indicator_matrix(self) -> np.ndarray:
        """Partition matrix P (n x M)."""
        P = np.zeros((self.n, self.region_count))
        for b, rows in enumerate(self.regions):
            P[rows, b] = 1.0
        return P

    def solve_levels(self, p_tilde: np.ndarray, basis: np.ndarray) -> np.ndarray:
        """Minimum-norm least-squares levels, solved in the coordinates of the basis."""
        if basis.shape[1] == 0:
            return np.zeros(p_tilde.shape[1])
        R = basis.T @ p_tilde
        z = basis.T @ self.y_tilde
        return scipy.linalg.lstsq(R, z)[0]

    def spectral_loss(self, p_tilde: np.ndarray, levels: np.ndarray) -> float:
        residual = self.y_tilde - p_tilde @ levels
        return float(residual @ residual) / self.n

    def deflated_projection(self) -> np.ndarray:
        """((I - U U^T) Q)^T QY, cached until the next accepted split."""
        if self._projection is None:
            self._projection = self.q_deflated.T @ self.y_tilde
        return self._projection

    def _orthogonalize(self, raw: np.ndarray) -> Optional[np.ndarray]:
        u = raw - self.basis @ (self.basis.T @ raw)
        u = u - self.basis @ (self.basis.T @ u)
        norm = float(np.linalg.norm(u))
        if norm <= BASIS_TOL:
            return None
        return u / norm

    def _deflate(self, u: np.ndarray) -> None:
        self.basis = np.column_stack([self.basis, u])
        self.q_deflated -= np.outer(u, u @ self.Q)

    def evaluate_region(self, b: int, covariates: Iterable[int], min_leaf: int) -> Optional[SplitCandidate]:
        """
        Best split of region b over the given covariates.

        Within a covariate the smallest threshold among near-ties wins; across covariates the lowest index.

        Returns:
            Optional[SplitCandidate]: None when no split leaves min_leaf rows on both sides.
        """
        rows_b = self.regions[b]
        if rows_b.size < 2 * min_leaf:
            return None
        projection = self.deflated_projection()
        best = None
        for j in sorted(int(c) for c in covariates):
            values = self.X[rows_b, j]
            order = np.argsort(values, kind="stable")
            sorted_values = values[order]
            boundaries = candidate_boundaries(sorted_values, min_leaf, self.max_candidates)
            if boundaries.size == 0:
                continue
            rows = rows_b[order]
            columns = np.cumsum(self.q_deflated[:, rows[:boundaries[-1]]], axis=1)[:, boundaries - 1]
            norm_sq = np.einsum("ij,ij->j", columns, columns)
            numerators = np.cumsum(projection[rows[:boundaries[-1]]])[boundaries - 1]
            resolvable = norm_sq > BASIS_TOL ** 2
            scores = np.zeros(boundaries.size)
            scores[resolvable] = numerators[resolvable] ** 2 / norm_sq[resolvable]
            top = float(scores.max())
            pick = int(np.flatnonzero(scores >= top - TIE_RTOL * top)[0])
            k = int(boundaries[pick])
            if best is not None and not scores[pick] > best.score + TIE_RTOL * best.score:
                continue
            best = SplitCandidate(
                region=b,
                covariate=j,
                threshold=float(0.5 * (sorted_values[k - 1] + sorted_values[k])),
                left_index=np.sort(rows[:k]),
                score=float(scores[pick]),
                region_version=self.region_version[b],
            )
        return best

    def check_current(self, candidate: SplitCandidate) -> None:
        """Raise ConsistencyError when the candidate was scored on an older version of its region."""
        b = candidate.region
        if b >= self.region_count or self.region_version[b] != candidate.region_version:
            raise ConsistencyError(f"Split candidate for region {b} is stale (scored at version {candidate.region_version}).")

    def try_split(self, candidate: SplitCandidate) -> SplitTrial:
        """Refit the partition with candidate applied, without committing it."""
        self.check_current(candidate)
        b = candidate.region
        qe = self.Q[:, candidate.left_index].sum(axis=1)
        p_tilde = np.column_stack([self.p_tilde, qe])
        p_tilde[:, b] -= qe
        u = self._orthogonalize(self.q_deflated[:, candidate.left_index].sum(axis=1))
        basis = self.basis if u is None else np.column_stack([self.basis, u])
        levels = self.solve_levels(p_tilde, basis)
        loss = self.spectral_loss(p_tilde, levels)
        return SplitTrial(candidate=candidate, p_tilde=p_tilde, basis_vector=u, levels=levels, loss=loss, decrease=self.loss - loss)

    def accept_split(self, candidate: SplitCandidate, trial: Optional[SplitTrial] = None) -> AcceptedSplit:
        """
        Commit candidate: the left side becomes a new region appended at the end, region b keeps the right side.
        """
        if trial is None or trial.candidate is not candidate:
            trial = self.try_split(candidate)
        else:
            self.check_current(candidate)
        b = candidate.region
        left = candidate.left_index
        right = np.setdiff1d(self.regions[b], left, assume_unique=True)
        self.regions[b] = right
        self.regions.append(left)
        self.region_version[b] += 1
        self.region_version.append(0)
        self.p_tilde = trial.p_tilde
        if trial.basis_vector is not None:
            self._deflate(trial.basis_vector)
        self.levels = trial.levels
        self.loss = trial.loss
        self._projection = None
        record = AcceptedSplit(
            region=b,
            new_region=self.region_count - 1,
            covariate=candidate.covariate,
            threshold=candidate.threshold,
            score=candidate.score,
            decrease=trial.decrease,
        )
        self.history.append(record)
        logger.debug("split region %d on x%d <= %.6g: alpha=%.6g d=%.6g", b, candidate.covariate, candidate.threshold, candidate.score, trial.decrease)
        return record

    def leaf_gram(self) -> tuple[np.ndarray, np.ndarray]:
        """(QP)^T QP and (QP)^T QY of the current partition."""
        return self.p_tilde.T @ self.p_tilde, self.p_tilde.T @ self.y_tilde


def evaluate_region_splits(state: PartitionState, region: int, covariates: Iterable[int], min_leaf: int = 5) -> Optional[SplitCandidate]:
    """Best split candidate of one region; see PartitionState.evaluate_region."""
    return state.evaluate_region(region, covariates, min_leaf)


def accept_split(state: PartitionState, candidate: SplitCandidate, trial: Optional[SplitTrial] = None) -> PartitionState:
    """Commit a split candidate and return the updated state."""
    state.accept_split(candidate, trial)
    return state
