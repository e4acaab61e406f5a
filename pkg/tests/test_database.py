import sqlite3
import pytest
from src.database.database import ResultsDB
from src.harness.experiments import cluster_bound_experiment
from src.harness.result import ExperimentResult
from src.harness.spec import ExperimentSpec
from src.model.params import ModelParams


@pytest.fixture
def result():
    spec = ExperimentSpec(
        kind="cluster-bound",
        params=ModelParams(2, (0.0, 0.5, 1.0), 1.0),
        beta_grid=(1.0, 2.0),
        sides=(4, 4),
        horizon=2.0,
        trials=2,
        seed=5,
    )
    return cluster_bound_experiment(spec)


def test_missing_database_without_create(tmp_path):
    with pytest.raises(FileNotFoundError):
        ResultsDB(str(tmp_path / "absent.sqlite"), create=False)


def test_save_and_load_rows(tmp_path, result):
    db = ResultsDB(str(tmp_path / "nested" / "results.sqlite"))
    first = db.save_result(result)
    second = db.save_result(result)
    assert second == first + 1
    rows = db.load_rows(first)
    assert len(rows) == len(result.rows)
    assert rows["censored"].dtype == bool
    reloaded = ExperimentResult.from_rows(rows.to_dict(orient="records"))
    assert reloaded.rows["value"].tolist() == result.rows["value"].tolist()
    listing = db.experiments()
    assert listing["kind"].tolist() == ["cluster-bound", "cluster-bound"]
    assert listing["seed"].tolist() == [5, 5]


def test_reopening_keeps_experiments(tmp_path, result):
    path = str(tmp_path / "results.sqlite")
    ResultsDB(path).save_result(result)
    assert len(ResultsDB(path, create=False).experiments()) == 1


def test_result_without_spec_is_stored(tmp_path, result):
    db = ResultsDB(str(tmp_path / "results.sqlite"))
    bare = ExperimentResult(result.rows)
    experiment_id = db.save_result(bare)
    assert db.experiments()["kind"].tolist() == ["unknown"]
    assert len(db.load_rows(experiment_id)) == len(result.rows)


def test_load_result_keeps_metadata(tmp_path, result):
    db = ResultsDB(str(tmp_path / "results.sqlite"))
    experiment_id = db.save_result(result)
    loaded = db.load_result(experiment_id)
    assert loaded.meta == result.meta
    assert loaded.summary["count"].tolist() == result.summary["count"].tolist()
    with pytest.raises(KeyError):
        db.load_result(experiment_id + 10)


def test_failed_statement_names_the_sql(tmp_path):
    db = ResultsDB(str(tmp_path / "results.sqlite"))
    with pytest.raises(sqlite3.Error, match="tMissing"):
        db.execute("INSERT INTO tMissing VALUES (1)")
