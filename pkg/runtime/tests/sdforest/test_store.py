"""Tests for CSV ingestion, the dataset store and the model store."""
import json

import numpy as np
import pytest

from sdforest.com.errors import DataFormatError, ModelLoadError, NonFiniteInputError
from sdforest.forest import ForestConfig, fit_forest, predict_forest
from sdforest.simgen import SimSpec, gen_linear
from sdforest.store import DatasetStore, ModelStore, read_sidecar, read_table
from sdforest.tree import fit_sdtree, predict_tree
from sdforest.spectral import trim_transform


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_read_table_splits_columns(tmp_path):
    """Test default predictors, the response and an optional truth column."""
    path = _write(tmp_path / "t.csv", "a,b,y,f0\n1,2,3,4\n5,6,7,8\n")
    table = read_table(path, response="y", truth="f0")
    assert table.feature_names == ["a", "b"]
    assert np.array_equal(table.X, [[1, 2], [5, 6]])
    assert np.array_equal(table.Y, [3, 7])
    assert np.array_equal(table.truth, [4, 8])
    without_truth = read_table(path, response="y", truth="missing")
    assert without_truth.truth is None
    assert without_truth.feature_names == ["a", "b", "f0"]


def test_read_table_explicit_features(tmp_path):
    """Test explicit predictors and the missing-column error."""
    path = _write(tmp_path / "t.csv", "a,b,y\n1,2,3\n4,5,6\n")
    assert read_table(path, features=["b"]).feature_names == ["b"]
    with pytest.raises(DataFormatError, match="c"):
        read_table(path, features=["c"])
    with pytest.raises(DataFormatError, match="response column 'z'"):
        read_table(path, response="z")


def test_non_numeric_cell_names_row_and_column(tmp_path):
    """Test that a non-numeric cell is reported with its column and row."""
    path = _write(tmp_path / "t.csv", "a,b,y\n1,2,3\n4,oops,6\n")
    with pytest.raises(DataFormatError, match=r"'oops' in column 'b' at data row 2 \(line 3\)"):
        read_table(path, response="y")


def test_missing_cell_is_non_finite(tmp_path):
    """Test that an empty cell raises with its location."""
    path = _write(tmp_path / "t.csv", "a,b,y\n1,,3\n4,5,6\n")
    with pytest.raises(NonFiniteInputError, match="column 'b' at data row 1"):
        read_table(path, response="y")


def test_unreadable_files(tmp_path):
    """Test missing and empty files."""
    with pytest.raises(DataFormatError, match="does not exist"):
        read_table(tmp_path / "absent.csv")
    with pytest.raises(DataFormatError):
        read_table(_write(tmp_path / "empty.csv", ""))


def test_dataset_round_trip(tmp_path):
    """Test that a simulated dataset and its sidecar survive writing and reading."""
    data = gen_linear(SimSpec(n=25, p=4, q=2, n_parents=2, seed=21))
    store = DatasetStore(tmp_path / "sim")
    csv_path = store.put_dataset(data, name="draw", seed=21)
    header = csv_path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "x1,x2,x3,x4,y,f0"
    table, sidecar = store.get_dataset("draw")
    assert np.array_equal(table.X, data.X)
    assert np.array_equal(table.Y, data.Y)
    assert np.array_equal(table.truth, data.f0_values)
    assert sidecar.parents == data.parents and sidecar.seed == 21
    assert np.allclose(sidecar.f0(data.X), data.f0_values)
    assert sidecar.spec == data.process.spec


def test_sidecar_absent_or_invalid(tmp_path):
    """Test the optional sidecar reader."""
    assert read_sidecar(tmp_path / "none.json") is None
    with pytest.raises(DataFormatError):
        read_sidecar(_write(tmp_path / "bad.json", json.dumps({"parents": "x"})))


def test_forest_round_trip(tmp_path, small_design):
    """Test that a stored forest predicts identically after reloading."""
    X, Y = small_design
    model = fit_forest(X, Y, ForestConfig(n_trees=3, seed=4))
    store = ModelStore(tmp_path)
    path = store.put_forest(model)
    assert path.name == "model.json"
    loaded = store.get_forest()
    assert np.array_equal(predict_forest(loaded, X), predict_forest(model, X))
    assert loaded.model_dump_json() == model.model_dump_json()


def test_tree_round_trip(tmp_path, small_design):
    """Test storing a single tree."""
    X, Y = small_design
    tree = fit_sdtree(X, Y, trim_transform(X), cp=0.01)
    store = ModelStore(tmp_path)
    store.put_tree(tree, "tree.json")
    assert np.array_equal(predict_tree(store.get_tree("tree"), X), predict_tree(tree, X))


def test_model_load_errors(tmp_path, small_design):
    """Test missing, malformed and wrong-version model files."""
    store = ModelStore(tmp_path)
    with pytest.raises(ModelLoadError):
        store.get_forest("absent")
    _write(tmp_path / "broken.json", "{not json")
    with pytest.raises(ModelLoadError):
        store.get_forest("broken")
    X, Y = small_design
    document = json.loads(fit_forest(X, Y, ForestConfig(n_trees=2, seed=1)).model_dump_json())
    document["version"] = "2"
    _write(tmp_path / "future.json", json.dumps(document))
    with pytest.raises(ModelLoadError):
        store.get_forest("future")
