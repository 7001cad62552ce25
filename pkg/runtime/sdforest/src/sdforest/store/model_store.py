"""
File store for fitted trees and forests.

Models are written as their pydantic JSON; reading validates the schema and the forest version.
All exceptions that may be raised are documented in the docstrings.
"""
from pathlib import Path
from typing import Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from sdforest.com.errors import ModelLoadError, ModelSaveError
from sdforest.com.logging_utils import ProjectLogger
from sdforest.forest.forest_model import ForestModel
from sdforest.tree.tree_model import SDTreeModel

logger = ProjectLogger(__name__).get_logger()

T = TypeVar('T', bound=BaseModel)


class ModelStore:
    """
    Reads and writes model JSON files in one directory.
    """

    def __init__(self, directory: Union[str, Path]):
        """
        Args:
            directory (Union[str, Path]): directory holding the model files (created on first write).
        """
        self.directory = Path(directory)

    def path_for(self, name: str) -> Path:
        """Path of the model file `name` (".json" appended when missing)."""
        return self.directory / (name if name.endswith(".json") else f"{name}.json")

    def _put(self, model: BaseModel, name: str) -> Path:
        path = self.path_for(name)
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            path.write_text(model.model_dump_json(), encoding="utf-8")
        except OSError as e:
            raise ModelSaveError(f"Failed to write model file {path}.") from e
        logger.info("model written to %s", path)
        return path

    def _get(self, name: str, model: Type[T]) -> T:
        path = self.path_for(name)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ModelLoadError(f"Cannot read model file {path}.") from e
        try:
            return model.model_validate_json(text)
        except ValidationError as e:
            raise ModelLoadError(f"{path} is not a valid {model.__name__}: {e.errors()[0]['msg']}") from e

    def put_forest(self, forest: ForestModel, name: str = "model") -> Path:
        """
        Write a forest.

        Raises:
            ModelSaveError: If the file cannot be written.
        """
        return self._put(forest, name)

    def get_forest(self, name: str = "model") -> ForestModel:
        """
        Read a forest.

        Raises:
            ModelLoadError: If the file is missing, malformed or has an unsupported version.
        """
        return self._get(name, ForestModel)

    def put_tree(self, tree: SDTreeModel, name: str) -> Path:
        """
        Write a single tree.

        Raises:
            ModelSaveError: If the file cannot be written.
        """
        return self._put(tree, name)

    def get_tree(self, name: str) -> SDTreeModel:
        """
        Read a single tree.

        Raises:
            ModelLoadError: If the file is missing or malformed.
        """
        return self._get(name, SDTreeModel)
