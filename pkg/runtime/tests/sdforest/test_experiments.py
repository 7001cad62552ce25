"""Tests for the simulation experiments on tiny settings."""
import numpy as np
import pandas as pd
import pytest

from sdforest.cli.experiments import (ExperimentRecord, confounding_gap, parent_rank, run_bench_dims, run_bench_nonlinear, run_bench_perturb,
                                      run_rate_check, run_variant_study, summarize, varied_spec, write_experiment)
from sdforest.cli.main import main
from sdforest.cli.settings import ExperimentOptions, RunSettings
from sdforest.forest import ForestConfig
from sdforest.simgen import SimSpec, gen_linear
from sdforest.spectral import TransformOptions


def tiny_settings(**experiment) -> RunSettings:
    """Settings small enough for unit tests."""
    return RunSettings(
        seed=7,
        sim=SimSpec(n=40, p=6, q=2, n_parents=2),
        forest=ForestConfig(n_trees=3, min_leaf=3),
        experiment=ExperimentOptions(**{"reps": 2, "n_test": 50, **experiment}),
    )


def test_bench_dims_rows():
    """Test one f_mse row per method, value and replicate, in task order."""
    records, timings = run_bench_dims(tiny_settings(vary="q", values=[0, 2]), 7)
    assert len(records) == 2 * 2 * 2 and len(timings) == 8
    assert [(r.value, r.replicate, r.method) for r in records[:4]] == [
        (0.0, 0, "sdforest"), (0.0, 0, "classical"), (0.0, 1, "sdforest"), (0.0, 1, "classical")]
    assert all(r.metric == "f_mse" and r.parameter == "q" for r in records)
    assert all(1 <= r.details["parent_rank"] <= 6 for r in records)


def test_bench_dims_default_value():
    """Test that without values the configured parameter value is used."""
    records, _ = run_bench_dims(tiny_settings(vary="density"), 7)
    assert {r.value for r in records} == {1.0}


def test_experiments_are_thread_independent():
    """Test identical records for one and two worker threads."""
    settings = tiny_settings(values=[1])
    single, _ = run_bench_dims(settings, 3)
    threaded, _ = run_bench_dims(settings.model_copy(update={"threads": 2}), 3)
    assert single == threaded


def test_perturbation_at_zero_has_no_change():
    """Test zero prediction change at tau = 0 and one discrepancy row per replicate."""
    records, _ = run_bench_perturb(tiny_settings(tau_grid=[0.0, 1.0]), 11)
    zero = [r for r in records if r.metric == "prediction_change" and r.value == 0.0]
    assert len(zero) == 4 and all(r.score == 0.0 for r in zero)
    assert sum(r.metric == "discrepancy" for r in records) == 2
    assert all(r.score >= 0 for r in records)


def test_perturbation_on_given_data(confounded_data):
    """Test the robustness experiment on fixed base data."""
    records, _ = run_bench_perturb(tiny_settings(tau_grid=[0.5], reps=1), 2, confounded_data.X, confounded_data.Y)
    assert {r.method for r in records} == {"sdforest", "classical", "discrepancy"}


def test_rate_check_without_confounding_is_zero():
    """Test that q = 0 gives a gap of exactly zero."""
    settings = tiny_settings(rate_grid=[(30, 20), (40, 30)])
    settings = settings.model_copy(update={"sim": SimSpec(n=40, p=6, q=0, n_parents=2)})
    records, _ = run_rate_check(settings, 5)
    assert len(records) == 4
    assert all(r.score == 0.0 and r.details["normalized_gap"] == 0.0 for r in records)
    assert {r.value for r in records} == {20.0, 30.0}


def test_confounding_gap_positive_with_confounding():
    """Test a positive gap for confounded data."""
    assert confounding_gap(gen_linear(SimSpec(n=50, p=30, q=3, n_parents=1, seed=4))) > 0


def test_rate_check_rows_name_the_trim_transform():
    """Test that gap rows are labelled trim whatever forest transform is configured."""
    settings = tiny_settings(rate_grid=[(30, 20)], reps=1)
    for kind in ("identity", "pca"):
        forest = ForestConfig(n_trees=3, transform=TransformOptions(kind=kind, q_remove=1))
        records, timings = run_rate_check(settings.model_copy(update={"forest": forest}), 5)
        assert [r.method for r in records] == ["trim"]
        assert [t.method for t in timings] == ["trim"]


def test_variant_study_rows():
    """Test SDT1 and SDT2 rows sharing data and seed."""
    settings = tiny_settings()
    settings = settings.model_copy(update={"sim": SimSpec(n=60, p=6, q=2, n_parents=2, f0_kind="random_tree", random_tree_leaves=4)})
    records, _ = run_variant_study(settings, 9)
    assert [r.method for r in records] == ["SDT1", "SDT2", "SDT1", "SDT2"]
    assert records[0].seed == records[1].seed
    assert all(r.details["leaves"] >= 1 and r.details["train_loss"] >= 0 for r in records)


def test_bench_nonlinear_rows():
    """Test both methods under nonlinear confounding."""
    settings = tiny_settings().model_copy(update={"sim": SimSpec(n=40, p=5, n_parents=1, nonlinear_terms=3)})
    records, _ = run_bench_nonlinear(settings, 1)
    assert len(records) == 4 and {r.parameter for r in records} == {"nonlinear_terms"}


def test_varied_spec_is_validated():
    """Test parameter substitution and validation."""
    assert varied_spec(SimSpec(), "n", 50.0).n == 50
    assert varied_spec(SimSpec(), "density", 0.5).density == 0.5
    with pytest.raises(ValueError):
        varied_spec(SimSpec(), "density", 2.0)


def test_parent_rank():
    """Test the rank of the best-ranked parent."""
    importance = np.array([0.1, 0.5, 0.3, 0.0])
    assert parent_rank(importance, [2, 3]) == 2
    assert parent_rank(importance, [1]) == 1
    assert parent_rank(importance, []) is None


def test_summarize_medians():
    """Test medians and replicate counts per group."""
    records = [ExperimentRecord(experiment="e", method="m", parameter="q", value=1.0, replicate=r, seed=0, metric="f_mse", score=s)
               for r, s in enumerate([1.0, 3.0, 2.0])]
    summary = summarize(records)
    assert len(summary) == 1
    assert summary.iloc[0]["score"] == 2.0 and summary.iloc[0]["replicates"] == 3


def test_write_experiment_tables(tmp_path, mocker):
    """Test the result, summary and timing tables with their sidecars."""
    mocker.patch("sdforest.cli.io_utils.git_describe", return_value="v0-test")
    settings = tiny_settings(values=[2]).model_copy(update={"out_dir": str(tmp_path)})
    records, timings = run_bench_dims(settings, 7)
    write_experiment("bench_dims", records, timings, settings, 7)
    for name in ("bench_dims", "bench_dims_summary", "bench_dims_timings"):
        assert (tmp_path / f"{name}.csv").is_file() and (tmp_path / f"{name}.meta.json").is_file()
    assert "seconds" not in pd.read_csv(tmp_path / "bench_dims.csv").columns
    assert len(pd.read_csv(tmp_path / "bench_dims_summary.csv")) == 2


def test_bench_dims_command(tmp_path):
    """Test the experiment command end to end and its output independence from threads."""
    flags = ["--n", "30", "--p", "5", "--q", "1", "--n-parents", "1", "--n-trees", "2", "--reps", "1", "--n-test", "20",
             "--values", "0,1", "--seed", "4"]
    assert main(["bench-dims", *flags, "--out-dir", str(tmp_path / "a")]) == 0
    assert main(["bench-dims", *flags, "--threads", "2", "--out-dir", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "bench_dims.csv").read_bytes()
    assert first == (tmp_path / "b" / "bench_dims.csv").read_bytes()
    assert len(pd.read_csv(tmp_path / "a" / "bench_dims.csv")) == 4
