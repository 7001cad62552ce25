"""Output helpers: CSV tables with a metadata JSON sidecar."""
import json
from pathlib import Path
from typing import Optional

import pandas as pd

from sdforest import __version__
from sdforest.com.base_model import FrozenModel
from sdforest.com.errors import DataFormatError
from sdforest.com.logging_utils import ProjectLogger
from sdforest.com.shared_helper import git_describe

logger = ProjectLogger(__name__).get_logger()


class RunMeta(FrozenModel):
    """Metadata written next to every CSV output."""
    command: str
    config: dict
    seed: Optional[int] = None
    version: str = __version__
    git_describe: str


def make_meta(command: str, config: dict, seed: Optional[int]) -> RunMeta:
    return RunMeta(command=command, config=config, seed=seed, git_describe=git_describe())


def write_table(frame: pd.DataFrame, out_dir: Path, name: str, meta: RunMeta) -> Path:
    """
    Write `<name>.csv` and `<name>.meta.json` into out_dir.

    Raises:
        DataFormatError: If the files cannot be written.
    """
    out_dir = Path(out_dir)
    path = out_dir / f"{name}.csv"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
        (out_dir / f"{name}.meta.json").write_text(json.dumps(meta.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise DataFormatError(f"Failed to write {path}.") from e
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path
