from dataclasses import replace
import math
import numpy as np
import pandas as pd
import pytest
import yaml
from src.harness.experiments import (
    cluster_bound_experiment,
    crossing_experiment,
    cylinder_at,
    default_ladder,
    domination_experiment,
    domination_radius,
    growth_speed_experiment,
    measure_relaxation,
    monotonicity_audit,
    nucleation_law_experiment,
    run_experiment,
)
from src.harness.fitting import binomial_stderr, fit_exponent, fit_line
from src.harness.result import ExperimentResult
from src.harness.spec import ExperimentSpec, integer_scale, load_spec, parse_spec
from src.lattice.geometry import BoxRegion
from src.model.params import ModelParams, rate
from src.model.theory import predicted_exponent, theory
from src.utils.errors import DomainError

SINGLETON = ModelParams(0, (0.5,), 1.0)
WARM_2D = ModelParams(2, (0.0, 0.5, 1.0), 1.0)
COLD_2D = ModelParams(2, (0.0, 1.0, 3.0), 1.0)


def _spec(kind, params=WARM_2D, **options):
    options.setdefault("beta_grid", (1.0,))
    options.setdefault("trials", 3)
    return ExperimentSpec(kind=kind, params=params, **options)


def _frequencies(result, observable):
    rows = result.observable(observable)
    return rows.groupby("beta")["value"].mean()


# spec parsing


def test_parse_spec_defaults_the_grid_to_beta():
    spec = parse_spec(
        {"kind": "relaxation", "dim": 1, "gammas": [0.5, 2.0], "beta": 3, "L": 0.2}
    )
    assert spec.beta_grid == (3.0,)
    assert spec.params.beta == 3.0
    assert spec.region_at(3.0) == BoxRegion.cube(1, integer_scale(3.0, 0.2))


def test_parse_spec_rejects_bad_input():
    base = {"kind": "crossing", "dim": 2, "gammas": [0, 1, 2], "beta_grid": [2, 3], "K": 0.5}
    assert parse_spec(base).params.beta == 2.0
    with pytest.raises(DomainError, match="unknown"):
        parse_spec({**base, "colour": "blue"})
    with pytest.raises(DomainError):
        parse_spec({**base, "height": 3})
    with pytest.raises(DomainError):
        parse_spec({**base, "kind": "percolation"})
    with pytest.raises(DomainError):
        parse_spec({**base, "trials": 0})
    with pytest.raises(DomainError):
        parse_spec({k: v for k, v in base.items() if k not in ("beta_grid",)})
    with pytest.raises(DomainError):
        parse_spec({**base, "gammas": [2, 1, 0]})


def test_load_spec_applies_overrides(tmp_path):
    path = tmp_path / "sweep.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "kind": "relaxation",
                "dim": 0,
                "gammas": [0.5],
                "beta_grid": [4, 6],
                "sides": [],
                "trials": 5,
            }
        )
    )
    spec = load_spec(str(path), {"trials": 7, "seed": None})
    assert spec.trials == 7
    assert spec.beta_grid == (4.0, 6.0)
    assert spec.region_at(4.0).volume == 1
    assert spec.to_dict()["trials"] == 7


def test_scales_and_horizons():
    assert integer_scale(3.0, 0.0) == 1
    assert integer_scale(2.0, 0.5) == math.ceil(math.e)
    with pytest.raises(DomainError):
        integer_scale(1000.0, 1.0)
    spec = _spec("relaxation", kappa=0.5, L=0.3)
    assert spec.horizon_at(2.0) == pytest.approx(math.e)
    assert _spec("relaxation", L=0.3).horizon_at(2.0) == math.inf
    assert _spec("relaxation", L=0.3, horizon=4.0, kappa=9.0).horizon_at(2.0) == 4.0
    assert _spec("crossing", K=0.1).height_at(3.0) == 4
    assert _spec("crossing", K=0.1, height=6).height_at(3.0) == 6


# fitting


def test_fit_exact_exponential():
    betas = [1.0, 2.0, 3.0, 4.0]
    fit = fit_line(betas, [math.exp(2.5 * b) for b in betas])
    assert fit.slope == pytest.approx(2.5)
    assert fit.stderr == pytest.approx(0.0, abs=1e-9)
    assert fit.points == 4


def test_fit_absorbs_the_prefactor():
    betas = [1.0, 1.5, 2.0, 2.5, 3.0]
    fit = fit_line(betas, [7 * math.exp(1.2 * b) for b in betas])
    assert fit.slope == pytest.approx(1.2)
    assert fit.intercept == pytest.approx(math.log(7))


def test_fit_recovers_a_jittered_slope():
    betas = np.arange(1.0, 21.0)
    # alternating jitter in log space
    jitter = 0.1 * (-1.0) ** np.arange(betas.size)
    fit = fit_line(betas, np.exp(0.8 * betas + jitter))
    assert abs(fit.slope - 0.8) < 2 * fit.stderr


def test_fit_needs_three_usable_points():
    with pytest.raises(DomainError):
        fit_line([1.0, 2.0], [1.0, 2.0])
    # non-positive and infinite times are dropped before counting
    with pytest.raises(DomainError):
        fit_line([1.0, 2.0, 3.0, 4.0], [1.0, 0.0, math.inf, 2.0])


def test_fit_exponent_skips_censored_rows():
    rows = []
    for beta in (1.0, 2.0, 3.0):
        for trial in range(3):
            rows.append(
                {"beta": beta, "trial": trial, "seed": trial, "observable": "relaxation_time",
                 "value": math.exp(1.5 * beta), "censored": False}
            )
        rows.append(
            {"beta": beta, "trial": 3, "seed": 3, "observable": "relaxation_time",
             "value": 1e9, "censored": True}
        )
    result = ExperimentResult.from_rows(rows)
    assert result.censored == 3
    summary = result.summary
    assert summary["count"].tolist() == [3, 3, 3]
    assert summary["censored"].tolist() == [1, 1, 1]
    assert summary["log_median_over_beta"].tolist() == pytest.approx([1.5, 1.5, 1.5])
    assert fit_exponent(result).slope == pytest.approx(1.5)


def test_result_round_trips_through_csv(tmp_path):
    result = measure_relaxation(_spec("relaxation", params=SINGLETON, sides=(), trials=4))
    path = tmp_path / "rows.csv"
    result.to_csv(str(path))
    loaded = ExperimentResult.from_csv(str(path))
    pd.testing.assert_frame_equal(loaded.rows, result.rows)
    result.to_json(str(tmp_path / "rows.json"))
    assert (tmp_path / "rows.json").read_text().startswith("{")


# experiments


def test_relaxation_is_reproducible(tmp_path):
    spec = _spec("relaxation", params=ModelParams(1, (0.5, 2.0), 1.0), sides=(5,), trials=1, seed=11)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    measure_relaxation(spec).to_csv(str(first))
    measure_relaxation(spec).to_csv(str(second))
    assert first.read_bytes() == second.read_bytes()


def test_relaxation_workers_do_not_change_rows():
    spec = _spec("relaxation", params=ModelParams(1, (0.5, 2.0), 1.0), sides=(5,), trials=4)
    serial = measure_relaxation(spec)
    parallel = measure_relaxation(replace(spec, workers=2))
    pd.testing.assert_frame_equal(serial.rows, parallel.rows)


def test_relaxation_censors_at_the_horizon():
    spec = _spec("relaxation", params=SINGLETON, sides=(), beta_grid=(20.0,), horizon=1.0)
    result = measure_relaxation(spec)
    times = result.observable("relaxation_time")
    assert times["censored"].all()
    assert (times["value"] == 1.0).all()
    assert result.summary["count"].tolist() == [0, 0]


def test_relaxation_rejects_other_kinds():
    with pytest.raises(DomainError):
        measure_relaxation(_spec("crossing", K=0.1))


def test_singleton_relaxation_slope():
    spec = _spec(
        "relaxation", params=SINGLETON, sides=(), beta_grid=(2.0, 4.0, 6.0, 8.0), trials=40
    )
    fit = fit_exponent(measure_relaxation(spec))
    assert fit.slope == pytest.approx(0.5, abs=0.15)


def test_full_box_relaxation_is_slower_than_origin():
    spec = _spec("relaxation", sides=(4, 4), trials=5)
    origin = measure_relaxation(spec).observable("relaxation_time")["value"].to_numpy()
    full = measure_relaxation(replace(spec, stop="full"))
    assert np.all(full.observable("relaxation_time")["value"].to_numpy() >= origin)


def test_nucleation_law_reports_the_rate():
    spec = _spec("nucleation-law", sides=(4, 4), trials=10, beta_grid=(1.0, 2.0))
    result = nucleation_law_experiment(spec)
    for beta in (1.0, 2.0):
        key = str(beta)
        assert result.meta["rate"][key] == pytest.approx(16 * rate(WARM_2D.with_beta(beta), 0))
        assert 0 <= result.meta["ks_statistic"][key] <= 1
        assert 0 <= result.meta["ks_pvalue"][key] <= 1


def test_cluster_bound_at_time_zero():
    spec = _spec("cluster-bound", sides=(5, 5), horizon=0.0)
    result = cluster_bound_experiment(spec)
    assert (result.observable("max_diameter")["value"] == 0).all()
    assert (result.observable("exceeds")["value"] == 0).all()


def test_cluster_bound_thresholds():
    params = COLD_2D.with_beta(4.0)
    length = theory(params).length
    spec = _spec("cluster-bound", params=COLD_2D, sides=(5, 5), beta_grid=(4.0,), kappa=0.1)
    assert cluster_bound_experiment(spec).meta["threshold"]["4.0"] == integer_scale(4.0, length)
    by_beta = replace(spec, threshold="beta")
    assert cluster_bound_experiment(by_beta).meta["threshold"]["4.0"] == 4


def test_cluster_bound_needs_a_horizon():
    with pytest.raises(DomainError):
        cluster_bound_experiment(_spec("cluster-bound", sides=(5, 5)))


def test_crossing_at_time_zero():
    spec = _spec("crossing", sides=(4, 4), horizon=0.0)
    result = crossing_experiment(spec)
    assert (result.observable("crossed")["value"] == 0).all()
    assert (result.observable("multilayer_crossed")["value"] == 0).all()
    assert (result.observable("slice_void")["value"] == 1).all()
    assert result.meta["predicted_slice_void"]["1.0"] == 1.0


def test_crossing_floor_stays_below_multilayer():
    spec = _spec("crossing", sides=(4, 6), horizon=30.0, trials=5)
    result = crossing_experiment(spec)
    assert (result.observable("floor_in_multilayer")["value"] == 1).all()
    crossed = result.observable("crossed")["value"].to_numpy()
    layered = result.observable("multilayer_crossed")["value"].to_numpy()
    assert np.all(crossed <= layered)


def test_crossing_rejects_an_odd_cylinder():
    with pytest.raises(DomainError):
        crossing_experiment(_spec("crossing", sides=(4, 5), horizon=1.0))


def test_growth_speed_zero_threshold_and_monotone_times():
    spec = _spec("growth-speed", sides=(9, 9), ladder=(0, 1, 2, 4), horizon=500.0)
    result = growth_speed_experiment(spec)
    assert (result.observable("time_to_diameter_0")["value"] == 0).all()
    for trial in range(spec.trials):
        rows = result.rows[result.rows["trial"] == trial].set_index("observable")["value"]
        times = [rows[f"time_to_diameter_{m}"] for m in (0, 1, 2, 4)]
        assert times == sorted(times)


def test_growth_speed_censors_short_horizons():
    spec = _spec("growth-speed", sides=(9, 9), ladder=(1, 8), horizon=0.0)
    result = growth_speed_experiment(spec)
    assert result.observable("time_to_diameter_8")["censored"].all()


def test_default_ladder():
    assert default_ladder(BoxRegion.cube(2, 9)) == (1, 2, 4, 8)
    assert default_ladder(BoxRegion.cube(1, 1)) == ()


def test_domination_at_time_zero():
    result = domination_experiment(_spec("domination", sides=(6, 6), horizon=0.0))
    for observable in ("sigma_in_rho", "eta_in_xi", "nuclei_in_eta"):
        assert (result.observable(observable)["value"] == 1).all()


def test_domination_keeps_eta_inside_xi():
    spec = _spec("domination", params=COLD_2D, sides=(10, 10), kappa=0.9, trials=5, beta_grid=(2.0,))
    result = domination_experiment(spec)
    assert (result.observable("eta_in_xi")["value"] == 1).all()
    assert (result.observable("nuclei_in_eta")["value"] == 1).all()
    assert result.meta["radius"]["2.0"] == domination_radius(COLD_2D.with_beta(2.0))


def test_domination_radius_floor():
    assert domination_radius(ModelParams(1, (0.0, 0.0), 5.0)) == 2


def test_coupling_audit_finds_no_violations():
    spec = _spec("coupling-audit", sides=(5, 6), horizon=15.0, trials=5)
    result = monotonicity_audit(spec)
    assert (result.rows["value"] == 0).all()
    assert set(result.rows["observable"]) == {
        "initial_order_violations",
        "boundary_order_violations",
        "variant_order_violations",
    }


def test_run_experiment_dispatches_on_kind():
    result = run_experiment(_spec("cluster-bound", sides=(3, 3), horizon=0.0, trials=1))
    assert set(result.rows["observable"]) == {"max_diameter", "exceeds"}


def test_crossing_height_follows_the_height_exponent():
    spec = _spec("crossing", K=0.1, L=0.5, horizon=0.0)
    assert spec.height_at(1.0) == 2
    assert spec.height_at(2.0) == 4
    assert replace(spec, height=6).height_at(2.0) == 6
    assert cylinder_at(spec, 2.0).sides == (integer_scale(2.0, 0.1), 4)
    result = crossing_experiment(replace(spec, beta_grid=(2.0,)))
    assert (result.observable("crossed")["value"] == 0).all()


def test_growth_speed_records_the_predicted_exponents():
    spec = _spec("growth-speed", params=COLD_2D, sides=(5, 5), ladder=(1,), horizon=0.0, kappa=2.0)
    meta = growth_speed_experiment(spec).meta
    assert meta["first_step_exponent"] == 1.0
    assert meta["droplet_diameter_exponent"] == pytest.approx(2.0 - theory(COLD_2D).kappas[1])
    short = growth_speed_experiment(replace(spec, kappa=None)).meta
    assert short["droplet_diameter_exponent"] is None


def test_short_horizons_keep_clusters_below_beta():
    # horizon exponent far below Gamma_1 = 1
    spec = _spec(
        "cluster-bound",
        params=COLD_2D,
        sides=(20, 20),
        beta_grid=(4.0, 5.0, 6.0),
        kappa=0.2,
        threshold="beta",
        trials=50,
    )
    result = cluster_bound_experiment(spec)
    assert (result.observable("exceeds")["value"] == 0).all()


# acceptance-scale checks


@pytest.mark.slow
def test_singleton_exponent_matches_gamma_zero():
    spec = _spec(
        "relaxation", params=SINGLETON, sides=(), beta_grid=(4.0, 6.0, 8.0, 10.0), trials=200
    )
    assert fit_exponent(measure_relaxation(spec)).slope == pytest.approx(0.5, abs=0.05)


@pytest.mark.slow
def test_small_box_exponent_is_the_nucleation_cost():
    params = ModelParams(1, (0.5, 2.0), 2.0)
    spec = _spec("relaxation", params=params, sides=(5,), beta_grid=(2.0, 3.0, 4.0, 5.0), trials=100)
    target = predicted_exponent(params, 0.0)
    assert target == 2.0
    assert fit_exponent(measure_relaxation(spec)).slope == pytest.approx(target, rel=0.15)


@pytest.mark.slow
def test_cluster_diameters_stay_below_the_critical_length():
    kappa = 0.8 * theory(COLD_2D).kappa
    spec = _spec(
        "cluster-bound",
        params=COLD_2D,
        sides=(40, 40),
        beta_grid=(4.0, 5.0, 6.0),
        kappa=kappa,
        trials=200,
    )
    frequency = _frequencies(cluster_bound_experiment(spec), "exceeds").to_numpy()
    assert np.all(np.diff(frequency) <= 0)
    assert frequency[-1] <= 0.01


@pytest.mark.slow
def test_crossing_slice_void_frequency():
    params = ModelParams(2, (0.0, 1.0, 2.0), 3.0)
    spec = _spec("crossing", params=params, sides=(6, 2), beta_grid=(3.0,), horizon=1.0, trials=2000)
    result = crossing_experiment(spec)
    predicted = result.meta["predicted_slice_void"]["3.0"]
    assert predicted == pytest.approx(math.exp(-2 * 6 * rate(params, 1)))
    observed = result.observable("slice_void")["value"].mean()
    assert abs(observed - predicted) < 3 * binomial_stderr(predicted, 2000)


@pytest.mark.slow
def test_domination_frequencies():
    kappa = 0.8 * theory(COLD_2D).kappa
    spec = _spec(
        "domination",
        params=COLD_2D,
        sides=(24, 24),
        beta_grid=(3.0, 4.0, 5.0),
        kappa=kappa,
        trials=334,
    )
    result = domination_experiment(spec)
    assert (result.observable("eta_in_xi")["value"] == 1).all()
    frequency = _frequencies(result, "sigma_in_rho").to_numpy()
    slack = 2 * binomial_stderr(0.5, spec.trials)
    assert np.all(np.diff(frequency) >= -slack)


@pytest.mark.slow
@pytest.mark.parametrize(
    "params, sides",
    [(ModelParams(1, (0.0, 0.5), 1.0), (12,)), (WARM_2D, (6, 6))],
)
def test_coupling_audit_over_many_seeds(params, sides):
    spec = _spec("coupling-audit", params=params, sides=sides, horizon=10.0, trials=100)
    assert (monotonicity_audit(spec).rows["value"] == 0).all()


@pytest.mark.slow
def test_upper_grid_slope_is_closer_to_the_prediction():
    params = ModelParams(1, (0.5, 2.0), 1.0)
    target = predicted_exponent(params, 0.0)
    bottom = _spec("relaxation", params=params, sides=(5,), beta_grid=(1.0, 1.5, 2.0), trials=200)
    top = replace(bottom, beta_grid=(4.0, 5.0, 6.0))
    low, high = (fit_exponent(measure_relaxation(spec)).slope for spec in (bottom, top))
    assert abs(high - target) < abs(low - target)


@pytest.mark.slow
def test_infinite_volume_proxy_exponent():
    params = ModelParams(1, (0.5, 2.0), 3.0)
    kappa = theory(params).kappa
    assert kappa == pytest.approx(1.25)
    spec = _spec(
        "relaxation",
        params=params,
        L=2 * kappa,
        beta_grid=(3.0, 4.0, 5.0, 6.0),
        trials=100,
        engine="fast",
        workers=-1,
    )
    assert fit_exponent(measure_relaxation(spec)).slope == pytest.approx(kappa, rel=0.2)


@pytest.mark.slow
def test_time_to_diameter_one_tracks_the_first_step():
    spec = _spec(
        "growth-speed",
        params=COLD_2D,
        sides=(5, 5),
        ladder=(1,),
        beta_grid=(1.0, 2.0, 3.0, 4.0),
        trials=200,
    )
    result = growth_speed_experiment(spec)
    fit = fit_exponent(result, "time_to_diameter_1")
    assert fit.slope == pytest.approx(result.meta["first_step_exponent"], abs=0.15)


@pytest.mark.slow
def test_crossing_becomes_rarer_below_the_lower_critical_constant():
    kappa = 0.4 * theory(COLD_2D).kappas[1]
    spec = _spec(
        "crossing",
        params=COLD_2D,
        K=0.5,
        kappa=kappa,
        beta_grid=(1.0, 2.0, 3.0, 4.0),
        trials=300,
    )
    frequency = _frequencies(crossing_experiment(spec), "crossed").to_numpy()
    slack = 2 * binomial_stderr(0.5, spec.trials)
    assert np.all(np.diff(frequency) <= slack)
    assert frequency[-1] < frequency[0]
