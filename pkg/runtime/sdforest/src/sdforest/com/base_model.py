"""Base models shared by configuration, records and fitted models."""

from pydantic import BaseModel, ConfigDict


class StrictModel(BaseModel):
    """Base model with strict validation for all fields."""
    model_config = ConfigDict(extra="forbid", from_attributes=True)


class FrozenModel(StrictModel):
    """Immutable strict model; fitted models and configs derive from it."""
    model_config = ConfigDict(extra="forbid", from_attributes=True, frozen=True)


class ArrayModel(BaseModel):
    """Immutable container for numpy arrays (not serialized to JSON)."""
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)
