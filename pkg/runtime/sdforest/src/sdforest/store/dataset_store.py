"""
CSV ingestion and the simulated-dataset file format (CSV with x1..xp, y, f0 plus a JSON sidecar).
"""
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from sdforest.com.base_model import ArrayModel, FrozenModel
from sdforest.com.errors import DataFormatError, NonFiniteInputError
from sdforest.com.logging_utils import ProjectLogger
from sdforest.simgen.f0_functions import F0Function
from sdforest.simgen.sim_model import SimSpec, SyntheticDataset

logger = ProjectLogger(__name__).get_logger()


class Table(ArrayModel):
    """
    Numeric table read from CSV.

    Attributes:
        X (np.ndarray): predictor matrix.
        feature_names (list[str]): predictor column names.
        Y (Optional[np.ndarray]): response column, if requested.
        truth (Optional[np.ndarray]): ground-truth f0 column, if requested and present.
    """
    X: np.ndarray
    feature_names: list[str]
    Y: Optional[np.ndarray] = None
    truth: Optional[np.ndarray] = None


class DatasetSidecar(FrozenModel):
    """Generating parameters stored next to an exported dataset."""
    spec: SimSpec
    process_kind: str = "linear"
    parents: list[int]
    seed: Optional[int] = None
    f0: Optional[F0Function] = None


def _numeric_frame(frame: pd.DataFrame, path: Path) -> pd.DataFrame:
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna() & frame.notna()
    if bad.to_numpy().any():
        row, col = np.argwhere(bad.to_numpy())[0]
        raise DataFormatError(f"{path}: non-numeric value {frame.iat[row, col]!r} in column '{frame.columns[col]}' at data row {row + 1} (line {row + 2}).")
    missing = ~np.isfinite(numeric.to_numpy(dtype=float))
    if missing.any():
        row, col = np.argwhere(missing)[0]
        raise NonFiniteInputError(f"{path}: missing or infinite value in column '{frame.columns[col]}' at data row {row + 1} (line {row + 2}).")
    return numeric.astype(float)


def read_table(path: Union[str, Path], response: Optional[str] = None, truth: Optional[str] = None,
               features: Optional[Sequence[str]] = None, exclude: Sequence[str] = ()) -> Table:
    """
    Read a CSV with a header row.

    Args:
        path: CSV file.
        response (Optional[str]): name of the response column (required when given).
        truth (Optional[str]): name of an optional ground-truth column; ignored when absent.
        features (Optional[Sequence[str]]): predictor columns; defaults to every other column.
        exclude (Sequence[str]): columns never used as default predictors.
    Raises:
        DataFormatError: For unreadable files, missing columns or non-numeric cells (with row and column).
        NonFiniteInputError: For empty or infinite cells.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError as e:
        raise DataFormatError(f"Input file {path} does not exist.") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataFormatError(f"Cannot parse {path} as CSV: {e}") from e
    columns = [str(c) for c in frame.columns]
    frame.columns = columns
    if response is not None and response not in columns:
        raise DataFormatError(f"{path}: response column '{response}' not found; available columns: {', '.join(columns)}.")
    has_truth = truth is not None and truth in columns
    if features is None:
        features = [c for c in columns if c != response and not (has_truth and c == truth) and c not in exclude]
    else:
        absent = [c for c in features if c not in columns]
        if absent:
            raise DataFormatError(f"{path}: predictor columns missing: {', '.join(absent)}.")
        features = list(features)
    if not features:
        raise DataFormatError(f"{path}: no predictor columns.")
    used = list(features) + ([response] if response is not None else []) + ([truth] if has_truth else [])
    numeric = _numeric_frame(frame[used], path)
    return Table(
        X=numeric[features].to_numpy(dtype=float),
        feature_names=list(features),
        Y=numeric[response].to_numpy(dtype=float) if response is not None else None,
        truth=numeric[truth].to_numpy(dtype=float) if has_truth else None,
    )


class DatasetStore:
    """
    Writes and reads simulated datasets as `<name>.csv` plus `<name>.json`.
    """

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def put_dataset(self, dataset: SyntheticDataset, name: str = "data", seed: Optional[int] = None) -> Path:
        """
        Write X, Y and f0 values with header x1..xp, y, f0 and the sidecar with spec, parents, seed and f0 coefficients.

        Returns:
            Path: the CSV path.
        Raises:
            DataFormatError: If the files cannot be written.
        """
        p = dataset.X.shape[1]
        frame = pd.DataFrame(dataset.X, columns=[f"x{j + 1}" for j in range(p)])
        frame["y"] = dataset.Y
        frame["f0"] = dataset.f0_values
        sidecar = DatasetSidecar(spec=dataset.process.spec, process_kind=dataset.process.kind, parents=dataset.parents,
                                 seed=seed, f0=dataset.f0)
        csv_path = self.directory / f"{name}.csv"
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            frame.to_csv(csv_path, index=False)
            (self.directory / f"{name}.json").write_text(sidecar.model_dump_json(indent=2), encoding="utf-8")
        except OSError as e:
            raise DataFormatError(f"Failed to write dataset {csv_path}.") from e
        logger.info("dataset written to %s (n=%d, p=%d)", csv_path, dataset.X.shape[0], p)
        return csv_path

    def get_dataset(self, name: str = "data") -> tuple[Table, Optional[DatasetSidecar]]:
        """
        Read a dataset written by put_dataset; the sidecar is None when absent.

        Raises:
            DataFormatError: For unreadable or malformed files.
        """
        table = read_table(self.directory / f"{name}.csv", response="y", truth="f0")
        return table, read_sidecar(self.directory / f"{name}.json")


def read_sidecar(path: Union[str, Path]) -> Optional[DatasetSidecar]:
    """
    Sidecar JSON of an exported dataset, or None if the file does not exist.

    Raises:
        DataFormatError: If the file exists but is not a valid sidecar.
    """
    path = Path(path)
    if not path.is_file():
        return None
    try:
        return DatasetSidecar.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise DataFormatError(f"{path} is not a valid dataset sidecar.") from e
