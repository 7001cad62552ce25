"""Configuration and fitted model of spectrally deconfounded random forests."""
from typing import ClassVar, Optional

from pydantic import Field, field_validator

from sdforest.com.base_model import FrozenModel
from sdforest.spectral import TransformOptions
from sdforest.tree.tree_model import SDTreeModel, Variant


class ForestConfig(FrozenModel):
    """
    Forest hyper-parameters.

    Attributes:
        n_trees (int): number of trees.
        mtry (Optional[int]): covariates drawn per region evaluation; unset means max(1, floor(p / 2)).
        cp (float): minimum relative loss decrease of a split.
        transform (TransformOptions): how each tree's spectral transform is built.
        sample_size (Optional[int]): bootstrap sample size; unset means n.
        bootstrap (bool): resample rows with replacement; off fits every tree on all rows.
        max_candidates (int): thresholds per covariate and region.
        min_leaf (int): minimum rows per leaf.
        max_splits (Optional[int]): maximum splits per tree.
        variant (Variant): SDT1 or SDT2 growth.
        seed (Optional[int]): master seed; unset draws one from OS entropy at fit time.
        share_q (bool): reuse the full-sample transform restricted to each bootstrap sample.
        retain_fit_data (bool): keep per-tree least-squares data for exact pruning.
    """
    n_trees: int = Field(default=100, ge=1)
    mtry: Optional[int] = Field(default=None, ge=1)
    cp: float = Field(default=0.0, ge=0.0)
    transform: TransformOptions = Field(default_factory=TransformOptions)
    sample_size: Optional[int] = Field(default=None, ge=2)
    bootstrap: bool = True
    max_candidates: int = Field(default=100, ge=1)
    min_leaf: int = Field(default=5, ge=1)
    max_splits: Optional[int] = Field(default=None, ge=1)
    variant: Variant = "SDT1"
    seed: Optional[int] = Field(default=None, ge=0)
    share_q: bool = False
    retain_fit_data: bool = True

    def resolved_mtry(self, p: int) -> int:
        """Effective mtry for p covariates."""
        return self.mtry if self.mtry is not None else max(1, p // 2)


class ForestModel(FrozenModel):
    """
    Fitted forest: trees, per-tree bootstrap indices and the configuration used (seed resolved).

    Class Attributes:
        SCHEMA_VERSION (str): version of the JSON layout.
    """
    SCHEMA_VERSION: ClassVar[str] = "1"

    version: str = Field(..., description="Forest JSON schema version")
    trees: list[SDTreeModel]
    bootstrap_indices: list[Optional[list[int]]]
    config: ForestConfig
    n_features: int = Field(..., ge=1)
    n_samples: int = Field(..., ge=1)
    feature_names: Optional[list[str]] = None

    @field_validator("version")
    @classmethod
    def _known_version(cls, value: str) -> str:
        if value != cls.SCHEMA_VERSION:
            raise ValueError(f"unsupported forest version '{value}', expected '{cls.SCHEMA_VERSION}'")
        return value

    @property
    def n_trees(self) -> int:
        return len(self.trees)
