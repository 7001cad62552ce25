from sdforest.store.dataset_store import DatasetSidecar, DatasetStore, Table, read_sidecar, read_table
from sdforest.store.model_store import ModelStore

__all__ = ["DatasetSidecar", "DatasetStore", "ModelStore", "Table", "read_sidecar", "read_table"]
