import pandas as pd
import pytest
from main import main
from src.lattice.geometry import BoxRegion, Configuration
from src.lattice.serialization import dumps, loads

MODEL_1D = ["--dim", "1", "--gammas", "0.5,2", "--beta", "1"]


def test_theory_prints_constants(capsys):
    assert main(["theory", "--dim", "2", "--gammas", "0,1,3", "--beta", "1"]) == 0
    out = capsys.readouterr().out
    assert "kappa_1 = 0.5" in out
    assert "kappa_2 = 1.33333" in out
    assert "predicted exponent" in out


def test_theory_bounds_for_a_finite_box(capsys):
    assert main(["theory", *MODEL_1D, "--L", "0.5"]) == 0
    assert "heuristic bounds" in capsys.readouterr().out


def test_invalid_model_returns_error_code(capsys):
    assert main(["theory", "--dim", "1", "--gammas", "2,1", "--beta", "1"]) == 2
    assert "error" in capsys.readouterr().err


def test_bootstrap_closure(tmp_path, capsys):
    region = BoxRegion((0, 0), (3, 3))
    source = tmp_path / "diagonal.cfg"
    source.write_text(dumps(Configuration.from_sites(region, [(0, 0), (1, 1)])))
    target = tmp_path / "closed.cfg"
    assert main(["bootstrap", str(source), "--out", str(target)]) == 0
    closed = loads(target.read_text())
    assert closed == Configuration.from_sites(region, [(0, 0), (0, 1), (1, 0), (1, 1)])
    assert "clusters: 1, max diameter: 1" in capsys.readouterr().out


def test_bootstrap_spanned_and_witness(tmp_path, capsys):
    region = BoxRegion((0, 0), (3, 3))
    source = tmp_path / "diagonal.cfg"
    source.write_text(dumps(Configuration.from_sites(region, [(0, 0), (1, 1), (2, 2)])))
    assert main(["bootstrap", str(source), "--op", "spanned"]) == 0
    assert "internally spanned: True" in capsys.readouterr().out
    assert main(["bootstrap", str(source), "--op", "witness", "--k", "5"]) == 0
    assert "witness: None" in capsys.readouterr().out


def test_simulate_writes_events_and_final(tmp_path, capsys):
    events, final = tmp_path / "events.csv", tmp_path / "final.cfg"
    code = main(
        ["simulate", *MODEL_1D, "--sides", "7", "--stop", "full", "--seed", "3", "--neighbors",
         "--out", str(events), "--final", str(final)]
    )
    assert code == 0
    frame = pd.read_csv(events)
    assert list(frame.columns) == ["time", "x_1", "neighbors"]
    assert len(frame) == 7
    assert frame["time"].is_monotonic_increasing
    assert loads(final.read_text()).count == 7
    assert "stopped by box_full" in capsys.readouterr().err


def test_simulate_events_without_neighbor_counts(tmp_path):
    events = tmp_path / "events.csv"
    assert main(["simulate", *MODEL_1D, "--sides", "5", "--stop", "full", "--out", str(events)]) == 0
    assert list(pd.read_csv(events).columns) == ["time", "x_1"]


@pytest.mark.parametrize("command", ["theory", "simulate"])
@pytest.mark.parametrize("line", ["bogus_key: 7", "horizen: 5"])
def test_config_with_unknown_keys_is_rejected(tmp_path, capsys, command, line):
    config = tmp_path / "model.yaml"
    config.write_text(f"dim: 1\ngammas: [0.5, 2]\nbeta: 1\nsides: [5]\n{line}\n")
    assert main([command, "--config", str(config)]) == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_simulate_reads_the_horizon_from_config(tmp_path, capsys):
    config = tmp_path / "model.yaml"
    config.write_text("dim: 1\ngammas: [0.5, 2]\nbeta: 1\nsides: [5]\nhorizon: 0.0001\nseed: 4\n")
    assert main(["simulate", "--config", str(config), "--stop", "full", "--out", str(tmp_path / "e.csv")]) == 0
    assert "stopped by time_limit" in capsys.readouterr().err


def test_simulate_rejects_unreachable_stop(capsys):
    code = main(
        ["simulate", *MODEL_1D, "--sides", "5", "--variant", "non-nucleating", "--stop", "any"]
    )
    assert code == 2


def test_sweep_writes_rows(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    code = main(
        ["sweep", "--dim", "0", "--gammas", "0.5", "--beta-grid", "1,2,3", "--sides", "",
         "--trials", "3", "--out", str(out)]
    )
    assert code == 0
    rows = pd.read_csv(out)
    assert set(rows["observable"]) == {"relaxation_time", "nucleation_time"}
    assert len(rows) == 18
    assert "fitted exponent" in capsys.readouterr().err
    assert main(["fit", str(out)]) == 0
    assert "slope" in capsys.readouterr().out


def test_experiment_from_config_with_database(tmp_path, capsys):
    config = tmp_path / "clusters.yaml"
    config.write_text(
        "dim: 2\ngammas: [0, 0.5, 1]\nbeta_grid: [1]\nsides: [4, 4]\nhorizon: 1.0\ntrials: 2\n"
    )
    db = tmp_path / "results.sqlite"
    code = main(["clusters", "--config", str(config), "--format", "json",
                 "--out", str(tmp_path / "out.json"), "--db", str(db)])
    assert code == 0
    assert db.exists()
    assert '"kind": "cluster-bound"' in (tmp_path / "out.json").read_text()


@pytest.mark.parametrize("flag", ["--trials", "--seed"])
def test_bad_integer_flags_exit(flag):
    with pytest.raises(SystemExit):
        main(["sweep", flag, "many"])
