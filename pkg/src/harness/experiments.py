"""
Experiment runners. Every experiment loops over the beta grid and the trials,
one private graphical field per trial seeded with spec.seed + trial, and
collects (beta, trial, seed, observable, value, censored) rows. Trials are
independent, so they fan out to joblib workers when spec.workers != 1.
"""

import math
import numpy as np
from joblib import Parallel, delayed
from src.analysis.observables import contains, max_cluster_diameter
from src.dynamics.boundary import BoundaryCondition, ProcessVariant
from src.dynamics.coupling import multilayer_run, ordering_violations, run_coupled
from src.dynamics.engines import get_engine, run_graphical
from src.dynamics.stopping import (
    AnyOccupied,
    BoxFull,
    MaxClusterDiameter,
    OriginOccupied,
    TimeLimit,
)
from src.harness.fitting import exponential_ks
from src.harness.result import ExperimentResult
from src.harness.spec import ExperimentSpec, integer_scale
from src.lattice.clusters import ClusterTracker, crosses
from src.lattice.geometry import BoxRegion, Configuration
from src.model.params import ModelParams, rate
from src.model.theory import droplet_diameter_exponent, theory
from src.morphology.operators import domination_pipeline
from src.randomness.field import GraphicalField, bernoulli_snapshot
from src.utils.errors import DomainError
from src.utils.helpers import AUDIT_STREAM_KEY
from src.utils.logging import progress, setup_logger

# density of the random initial configurations used by the coupling audit
AUDIT_DENSITY = 0.1


def _row(beta, trial, seed, observable, value, censored=False) -> dict:
    return {
        "beta": beta,
        "trial": trial,
        "seed": seed,
        "observable": observable,
        "value": float(value),
        "censored": bool(censored),
    }


def _with_limit(stop, horizon: float):
    return stop | TimeLimit(horizon) if math.isfinite(horizon) else stop


def _finite_horizon(spec: ExperimentSpec) -> None:
    if spec.horizon is None and spec.kappa is None:
        raise DomainError(f"{spec.kind} experiments need kappa or a fixed horizon")


def domination_radius(params: ModelParams) -> int:
    """
    Dilation radius ceil(exp(beta L_d) / beta), at least 2
    """
    length = theory(params).length
    return max(2, math.ceil(math.exp(params.beta * length) / params.beta))


def _run_trials(spec: ExperimentSpec, trial, meta: dict | None = None) -> ExperimentResult:
    logger = setup_logger("experiments", "harness")
    jobs = [(beta, t) for beta in spec.beta_grid for t in range(spec.trials)]
    logger.info(
        f"starting {spec.kind}: {len(jobs)} trials, beta grid {list(spec.beta_grid)}, "
        f"engine {spec.engine}, seed {spec.seed}"
    )
    bar = progress(jobs, spec.kind)
    if spec.workers == 1:
        chunks = [trial(spec, beta, t) for beta, t in bar]
    else:
        chunks = Parallel(n_jobs=spec.workers)(delayed(trial)(spec, beta, t) for beta, t in bar)
    result = ExperimentResult.from_rows(
        [row for chunk in chunks for row in chunk], spec, meta
    )
    if result.censored:
        logger.info(f"{spec.kind}: {result.censored} censored rows left out of summaries")
    logger.info(f"finished {spec.kind}: {len(result.rows)} rows")
    return result


def _relaxation_trial(spec: ExperimentSpec, beta: float, trial: int) -> list:
    seed = spec.seed + trial
    params, region = spec.params_at(beta), spec.region_at(beta)
    horizon = spec.horizon_at(beta)
    stop = OriginOccupied() if spec.stop == "origin" else BoxFull()
    trajectory = get_engine(spec.engine)(
        region,
        params,
        BoundaryCondition.parse(spec.boundary),
        ProcessVariant(spec.variant),
        None,
        GraphicalField(seed, region),
        _with_limit(stop, horizon),
    )
    censored = trajectory.stop_reason == "time_limit"
    nucleated = len(trajectory) > 0
    first = trajectory.times[0] if nucleated else trajectory.final_time
    return [
        _row(beta, trial, seed, "relaxation_time", trajectory.final_time, censored),
        _row(beta, trial, seed, "nucleation_time", first, not nucleated),
    ]


def measure_relaxation(spec: ExperimentSpec) -> ExperimentResult:
    """
    Relaxation time per trial: the first time the origin (or the whole box)
    is occupied, from the empty box of side ceil(exp(beta L)). Runs cut by
    the horizon are censored.
    """
    if spec.kind != "relaxation":
        raise DomainError(f"expected a relaxation experiment, got {spec.kind}")
    return _run_trials(spec, _relaxation_trial)


def _nucleation_trial(spec: ExperimentSpec, beta: float, trial: int) -> list:
    seed = spec.seed + trial
    params, region = spec.params_at(beta), spec.region_at(beta)
    trajectory = get_engine(spec.engine)(
        region,
        params,
        BoundaryCondition.empty(),
        ProcessVariant.FULL,
        None,
        GraphicalField(seed, region),
        _with_limit(AnyOccupied(), spec.horizon_at(beta)),
    )
    censored = trajectory.stop_reason == "time_limit"
    return [_row(beta, trial, seed, "nucleation_time", trajectory.final_time, censored)]


def nucleation_law_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """
    First occupation time anywhere in the empty box, compared per beta with
    the exponential law of rate |box| c(0) by a Kolmogorov-Smirnov test
    """
    if spec.kind != "nucleation-law":
        raise DomainError(f"expected a nucleation-law experiment, got {spec.kind}")
    result = _run_trials(spec, _nucleation_trial)
    statistics, pvalues, rates = {}, {}, {}
    for beta in spec.beta_grid:
        rows = result.rows
        samples = rows.loc[(rows["beta"] == beta) & ~rows["censored"], "value"]
        rates[str(beta)] = spec.region_at(beta).volume * rate(spec.params_at(beta), 0)
        if len(samples):
            test = exponential_ks(samples, rates[str(beta)])
            statistics[str(beta)] = float(test.statistic)
            pvalues[str(beta)] = float(test.pvalue)
    result.meta.update({"rate": rates, "ks_statistic": statistics, "ks_pvalue": pvalues})
    return result


def _threshold(spec: ExperimentSpec, params: ModelParams) -> int:
    if spec.threshold == "beta":
        return math.ceil(params.beta)
    return integer_scale(params.beta, theory(params).length)


def _cluster_bound_trial(spec: ExperimentSpec, beta: float, trial: int) -> list:
    seed = spec.seed + trial
    params, region = spec.params_at(beta), spec.region_at(beta)
    trajectory = get_engine(spec.engine)(
        region,
        params,
        BoundaryCondition.parse(spec.boundary),
        ProcessVariant(spec.variant),
        None,
        GraphicalField(seed, region),
        TimeLimit(spec.horizon_at(beta)),
    )
    diameter = max_cluster_diameter(trajectory.final)
    return [
        _row(beta, trial, seed, "max_diameter", diameter),
        _row(beta, trial, seed, "exceeds", diameter > _threshold(spec, params)),
    ]


def cluster_bound_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """
    Largest cluster diameter at the horizon and whether it exceeds the
    threshold: beta, or ceil(exp(beta L_d))
    """
    if spec.kind != "cluster-bound":
        raise DomainError(f"expected a cluster-bound experiment, got {spec.kind}")
    _finite_horizon(spec)
    thresholds = {str(b): _threshold(spec, spec.params_at(b)) for b in spec.beta_grid}
    return _run_trials(spec, _cluster_bound_trial, {"threshold": thresholds})


def cylinder_at(spec: ExperimentSpec, beta: float) -> BoxRegion:
    """
    Cylinder anchored at the origin: base side ceil(exp(beta K)) in the first
    d-1 axes and an even height along the last axis
    """
    dim = spec.params.dim
    if dim < 1:
        raise DomainError("crossing needs dimension >= 1")
    if spec.sides is not None:
        sides = tuple(spec.sides)
        if sides[-1] % 2:
            raise DomainError(f"cylinder height must be even, got {sides[-1]}")
    else:
        if spec.K is None:
            raise DomainError("crossing experiments need sides or a base exponent K")
        sides = (integer_scale(beta, spec.K),) * (dim - 1) + (spec.height_at(beta),)
    return BoxRegion(offset=(0,) * dim, sides=sides)


def _crossing_trial(spec: ExperimentSpec, beta: float, trial: int) -> list:
    seed = spec.seed + trial
    params, region = spec.params_at(beta), cylinder_at(spec, beta)
    axis = region.dim - 1
    horizon = spec.horizon_at(beta)
    field = GraphicalField(seed, region)
    floor = run_graphical(
        region,
        params,
        BoundaryCondition.floor(axis),
        ProcessVariant.NON_NUCLEATING,
        None,
        field,
        TimeLimit(horizon),
    ).final
    layers = multilayer_run(region, params, axis, field, horizon)
    bottom = layers.restricted(region.slab(axis, region.offset[axis], 2))
    return [
        _row(beta, trial, seed, "crossed", crosses(floor, axis)),
        _row(beta, trial, seed, "multilayer_crossed", crosses(layers, axis)),
        _row(beta, trial, seed, "slice_void", not bottom.occupied.any()),
        _row(beta, trial, seed, "floor_in_multilayer", contains(floor, layers)),
    ]


def crossing_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """
    Non-nucleating growth from an occupied floor in a cylinder, run to the
    horizon, next to the sandwiched multilayer process on the same field.
    Records crossing indicators and whether the bottom slice stayed void.
    """
    if spec.kind != "crossing":
        raise DomainError(f"expected a crossing experiment, got {spec.kind}")
    _finite_horizon(spec)
    void = {}
    for beta in spec.beta_grid:
        base = cylinder_at(spec, beta).volume // cylinder_at(spec, beta).sides[-1]
        c1 = rate(spec.params_at(beta), 1)
        void[str(beta)] = math.exp(-2 * base * c1 * spec.horizon_at(beta))
    return _run_trials(spec, _crossing_trial, {"predicted_slice_void": void})


def default_ladder(region: BoxRegion) -> tuple:
    top = max(region.sides) - 1
    ladder, m = [], 1
    while m <= top:
        ladder.append(m)
        m *= 2
    return tuple(ladder)


def _growth_trial(spec: ExperimentSpec, beta: float, trial: int) -> list:
    seed = spec.seed + trial
    params, region = spec.params_at(beta), spec.region_at(beta)
    ladder = sorted(spec.ladder if spec.ladder is not None else default_ladder(region))
    origin = (0,) * region.dim
    rows = [_row(beta, trial, seed, f"time_to_diameter_{m}", 0.0) for m in ladder if m <= 0]
    pending = [m for m in ladder if m > 0]
    if not pending:
        return rows
    trajectory = get_engine(spec.engine)(
        region,
        params,
        BoundaryCondition.empty(),
        ProcessVariant.NON_NUCLEATING,
        Configuration.from_sites(region, [origin]),
        GraphicalField(seed, region),
        _with_limit(MaxClusterDiameter(pending[-1]), spec.horizon_at(beta)),
    )
    # replay the events to find when each diameter was first reached
    tracker = ClusterTracker(region)
    tracker.add(region.index_of(origin))
    for t, index in zip(trajectory.times.tolist(), trajectory.sites.tolist()):
        largest = tracker.add(index)
        while pending and largest >= pending[0]:
            rows.append(_row(beta, trial, seed, f"time_to_diameter_{pending.pop(0)}", t))
    for m in pending:
        rows.append(_row(beta, trial, seed, f"time_to_diameter_{m}", trajectory.final_time, True))
    return rows


def growth_speed_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """
    Non-nucleating growth of a single droplet from the origin; records the
    first time its diameter reaches each threshold of the ladder
    """
    if spec.kind != "growth-speed":
        raise DomainError(f"expected a growth-speed experiment, got {spec.kind}")
    if spec.params.dim < 1:
        raise DomainError("growth speed needs dimension >= 1")
    # time to diameter 1 scales like 1/c(1); the droplet law needs a horizon exponent
    meta = {"first_step_exponent": spec.params.gammas[-2], "droplet_diameter_exponent": None}
    if spec.kappa is not None:
        meta["droplet_diameter_exponent"] = droplet_diameter_exponent(spec.params, spec.kappa)
    return _run_trials(spec, _growth_trial, meta)


def _domination_trial(spec: ExperimentSpec, beta: float, trial: int) -> list:
    seed = spec.seed + trial
    params, region = spec.params_at(beta), spec.region_at(beta)
    horizon = spec.horizon_at(beta)
    field = GraphicalField(seed, region)
    eta = bernoulli_snapshot(field, params, 0, horizon)
    rho, xi = domination_pipeline(eta, spec.radius or domination_radius(params))
    trajectory = run_graphical(
        region,
        params,
        BoundaryCondition.empty(),
        ProcessVariant.FULL,
        None,
        field,
        TimeLimit(horizon),
    )
    nuclei = trajectory.sites[trajectory.neighbor_counts == 0]
    return [
        _row(beta, trial, seed, "sigma_in_rho", contains(trajectory.final, rho)),
        _row(beta, trial, seed, "eta_in_xi", contains(eta, xi)),
        _row(beta, trial, seed, "nuclei_in_eta", bool(eta.occupied[nuclei].all())),
    ]


def domination_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """
    Compares the process at the horizon with the dilated and closed
    nucleation snapshot built from the same field
    """
    if spec.kind != "domination":
        raise DomainError(f"expected a domination experiment, got {spec.kind}")
    _finite_horizon(spec)
    radii = {str(b): spec.radius or domination_radius(spec.params_at(b)) for b in spec.beta_grid}
    return _run_trials(spec, _domination_trial, {"radius": radii})


def _audit_trial(spec: ExperimentSpec, beta: float, trial: int) -> list:
    seed = spec.seed + trial
    params, region = spec.params_at(beta), spec.region_at(beta)
    axis = region.dim - 1
    rng = np.random.default_rng([seed, AUDIT_STREAM_KEY])
    low = rng.random(region.volume) < AUDIT_DENSITY
    high = low | (rng.random(region.volume) < AUDIT_DENSITY)
    alpha, rho = Configuration(region, low), Configuration(region, high)
    stop = TimeLimit(spec.horizon_at(beta))
    empty = BoundaryCondition.empty()
    full, bare = ProcessVariant.FULL, ProcessVariant.NON_NUCLEATING
    small, large, floor, sandwich, quiet = run_coupled(
        region,
        params,
        [
            (empty, full, alpha, stop),
            (empty, full, rho, stop),
            (BoundaryCondition.floor(axis), full, alpha, stop),
            (BoundaryCondition.sandwich(axis), full, alpha, stop),
            (empty, bare, alpha, stop),
        ],
        GraphicalField(seed, region),
    )
    boundary = ordering_violations(small, floor) + ordering_violations(floor, sandwich)
    return [
        _row(beta, trial, seed, "initial_order_violations", ordering_violations(small, large)),
        _row(beta, trial, seed, "boundary_order_violations", boundary),
        _row(beta, trial, seed, "variant_order_violations", ordering_violations(quiet, small)),
    ]


def monotonicity_audit(spec: ExperimentSpec) -> ExperimentResult:
    """
    Coupled runs with ordered initial configurations, ordered boundaries
    (empty <= floor <= sandwich) and ordered variants; counts sites the
    smaller run occupied before the larger one
    """
    if spec.kind != "coupling-audit":
        raise DomainError(f"expected a coupling-audit experiment, got {spec.kind}")
    if spec.params.dim < 1:
        raise DomainError("the coupling audit needs dimension >= 1")
    _finite_horizon(spec)
    return _run_trials(spec, _audit_trial)


EXPERIMENTS = {
    "relaxation": measure_relaxation,
    "cluster-bound": cluster_bound_experiment,
    "crossing": crossing_experiment,
    "growth-speed": growth_speed_experiment,
    "domination": domination_experiment,
    "nucleation-law": nucleation_law_experiment,
    "coupling-audit": monotonicity_audit,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    return EXPERIMENTS[spec.kind](spec)
