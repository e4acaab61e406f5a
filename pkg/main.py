import argparse
import json
import math
import sys
import yaml
from src.analysis.observables import max_cluster_diameter
from src.database.database import ResultsDB
from src.dynamics.boundary import BoundaryCondition, ProcessVariant
from src.dynamics.engines import get_engine
from src.dynamics.stopping import TimeLimit, parse_stop
from src.harness.experiments import run_experiment
from src.harness.fitting import fit_exponent
from src.harness.result import ExperimentResult
from src.harness.spec import load_spec, parse_spec
from src.lattice.clusters import connected_clusters
from src.lattice.geometry import BoxRegion, Configuration
from src.lattice.serialization import ascii_grid, dumps, loads
from src.model.params import ModelParams, parse_params
from src.model.theory import (
    INFINITE_VOLUME,
    lower_bound_exponent,
    predicted_exponent,
    theory,
    upper_bound_exponent,
)
from src.morphology.bootstrap import al_witness, bootstrap_closure, internally_spanned
from src.morphology.operators import dilate, domination_pipeline, erode
from src.randomness.field import GraphicalField
from src.utils.errors import DomainError
from src.utils.helpers import (
    DEFAULT_SEED,
    EXPERIMENT_KEYS,
    PARAM_KEYS,
    PRIMARY_OBSERVABLES,
    RESULTS_DB_PATH,
)

# experiment kind behind each experiment subcommand
EXPERIMENT_COMMANDS = {
    "sweep": "relaxation",
    "couple": "coupling-audit",
    "cross": "crossing",
    "speed": "growth-speed",
    "dominate": "domination",
    "clusters": "cluster-bound",
    "nucleation": "nucleation-law",
}


def _floats(text: str) -> list:
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text: str) -> list:
    return [int(x) for x in text.replace(",", " ").split()]


def add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML file with model and experiment keys")
    parser.add_argument("--dim", type=int)
    parser.add_argument("--gammas", type=_floats, help="Gamma_0..Gamma_d, e.g. '0,1,2'")
    parser.add_argument("--beta", type=float)
    parser.add_argument("--rate-at-d", dest="rate_at_d", choices=["gamma-zero", "one"])


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--beta-grid", dest="beta_grid", type=_floats)
    parser.add_argument("--L", type=float, help="volume exponent: box side ceil(exp(beta L))")
    parser.add_argument("--sides", type=_ints, help="explicit box sides")
    parser.add_argument("--K", type=float, help="cylinder base exponent")
    parser.add_argument("--height", type=int)
    parser.add_argument("--kappa", type=float, help="horizon exponent: exp(beta kappa)")
    parser.add_argument("--horizon", type=float, help="fixed time horizon")
    parser.add_argument("--boundary", help="empty, floor:<axis> or sandwich:<axis>")
    parser.add_argument("--variant", choices=[v.value for v in ProcessVariant])
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--engine", choices=["graphical", "fast"])
    parser.add_argument("--radius", type=int)
    parser.add_argument("--ladder", type=_ints)
    parser.add_argument("--threshold", choices=["length", "beta"])
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", help="output path, stdout when omitted")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--db", nargs="?", const=RESULTS_DB_PATH, help="append results to an SQLite file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nucleation-growth-lab",
        description="Nucleation-and-growth lattice simulator and experiment harness",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="one run, event log as CSV")
    add_model_flags(simulate)
    add_run_flags(simulate)
    simulate.add_argument("--stop", default="origin", help="e.g. 'origin', 'full,time:50', 'diameter:5'")
    simulate.add_argument("--initial", help="serialized starting configuration")
    simulate.add_argument("--final", help="write the final configuration here")
    simulate.add_argument(
        "--neighbors", action="store_true", help="add the neighbour count seen by each event"
    )

    for name, kind in EXPERIMENT_COMMANDS.items():
        sub = commands.add_parser(name, help=f"{kind} experiment over a beta grid")
        add_model_flags(sub)
        add_run_flags(sub)
        if name == "sweep":
            sub.add_argument("--stop", choices=["origin", "full"])

    fit = commands.add_parser("fit", help="fit ln(median) against beta from a rows CSV")
    fit.add_argument("input")
    fit.add_argument("--observable")

    boot = commands.add_parser("bootstrap", help="morphology operations on a serialized configuration")
    boot.add_argument("input")
    boot.add_argument(
        "--op",
        choices=["closure", "dilate", "erode", "spanned", "witness", "dominate"],
        default="closure",
    )
    boot.add_argument("--radius", type=int, default=2)
    boot.add_argument("--k", type=int, default=1)
    boot.add_argument("--out")

    calc = commands.add_parser("theory", help="critical constants and predicted exponents")
    add_model_flags(calc)
    calc.add_argument("--L", type=float, default=INFINITE_VOLUME)
    return parser


def _mapping(args: argparse.Namespace) -> dict:
    skip = {"command", "config", "out", "format", "db", "initial", "final", "neighbors"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def _values(args: argparse.Namespace) -> dict:
    # command-line flags win over the config file
    values = _mapping(args)
    if getattr(args, "config", None):
        values = {**load_spec_mapping(args.config), **values}
    unknown = sorted(set(values) - set(PARAM_KEYS) - set(EXPERIMENT_KEYS))
    if unknown:
        raise DomainError(f"unknown config keys: {unknown}")
    return values


def _model(args: argparse.Namespace) -> ModelParams:
    model = {k: v for k, v in _values(args).items() if k in PARAM_KEYS}
    model.setdefault("beta", 1.0)
    return parse_params(model)


def load_spec_mapping(path: str) -> dict:
    with open(path) as f:
        return yaml.safe_load(f) or {}


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def run_simulate(args: argparse.Namespace) -> None:
    params = _model(args)
    values = _values(args)
    if "sides" in values:
        region = BoxRegion(offset=tuple(-(s // 2) for s in values["sides"]), sides=tuple(values["sides"]))
    else:
        side = max(1, math.ceil(math.exp(params.beta * values.get("L", 0.0))))
        region = BoxRegion.cube(params.dim, side)
    initial = None
    if args.initial:
        with open(args.initial) as f:
            initial = loads(f.read())
    stop = parse_stop(args.stop, params.dim)
    if values.get("horizon") is not None:
        stop = stop | TimeLimit(float(values["horizon"]))
    trajectory = get_engine(values.get("engine", "graphical"))(
        region,
        params,
        BoundaryCondition.parse(values.get("boundary", "empty")),
        ProcessVariant(values.get("variant", "full")),
        initial,
        GraphicalField(values.get("seed", DEFAULT_SEED), region),
        stop,
    )
    _emit(trajectory.to_frame(args.neighbors).to_csv(index=False), args.out)
    if args.final:
        _emit(dumps(trajectory.final), args.final)
    print(
        f"{len(trajectory)} events, stopped by {trajectory.stop_reason} at t={trajectory.final_time:.6g}",
        file=sys.stderr,
    )


def run_experiment_command(args: argparse.Namespace) -> None:
    overrides = {**_mapping(args), "kind": EXPERIMENT_COMMANDS[args.command]}
    spec = load_spec(args.config, overrides) if args.config else parse_spec(overrides)
    result = run_experiment(spec)
    if args.format == "json":
        if args.out is None:
            sys.stdout.write(json.dumps(result.to_dict(), indent=2, default=str) + "\n")
        else:
            result.to_json(args.out)
    elif args.out is None:
        sys.stdout.write(result.rows.to_csv(index=False))
    else:
        result.to_csv(args.out)
    if args.db:
        ResultsDB(args.db).save_result(result)
    print(result.summary.to_string(index=False), file=sys.stderr)
    observable = PRIMARY_OBSERVABLES.get(spec.kind)
    if observable is not None and len(spec.beta_grid) >= 3:
        try:
            fit = fit_exponent(result, observable)
            print(f"fitted exponent {fit.slope:.4f} +/- {fit.stderr:.4f}", file=sys.stderr)
        except DomainError as e:
            print(f"no fit: {e}", file=sys.stderr)


def run_fit(args: argparse.Namespace) -> None:
    fit = fit_exponent(ExperimentResult.from_csv(args.input), args.observable)
    print(f"slope {fit.slope:.6f} stderr {fit.stderr:.6f} intercept {fit.intercept:.6f} points {fit.points}")


def _describe(config: Configuration) -> str:
    clusters = connected_clusters(config)
    return f"clusters: {len(clusters)}, max diameter: {max_cluster_diameter(config)}"


def run_bootstrap(args: argparse.Namespace) -> None:
    with open(args.input) as f:
        config = loads(f.read())
    if args.op == "spanned":
        print(f"internally spanned: {internally_spanned(config, config.region)}")
        return
    if args.op == "witness":
        print(f"witness: {al_witness(config, args.k)}")
        return
    if args.op == "closure":
        output = bootstrap_closure(config)
    elif args.op == "dilate":
        output = dilate(config, args.radius)
    elif args.op == "erode":
        output = erode(config, args.radius)
    else:
        output = domination_pipeline(config, args.radius)[0]
    _emit(dumps(output), args.out)
    if output.region.dim <= 2 and args.out is None:
        print(ascii_grid(output))
    print(_describe(output))


def run_theory(args: argparse.Namespace) -> None:
    params = _model(args)
    constants = theory(params)
    for i, (kappa, length) in enumerate(zip(constants.kappas, constants.lengths)):
        print(f"kappa_{i} = {kappa:.6g}    L_{i} = {length:.6g}")
    print(f"predicted exponent at L={args.L}: {predicted_exponent(params, args.L):.6g}")
    if math.isfinite(args.L):
        print(f"heuristic bounds: [{lower_bound_exponent(params, args.L):.6g}, {upper_bound_exponent(params, args.L):.6g}]")


COMMANDS = {
    "simulate": run_simulate,
    "fit": run_fit,
    "bootstrap": run_bootstrap,
    "theory": run_theory,
    **{name: run_experiment_command for name in EXPERIMENT_COMMANDS},
}


def main(argv: list | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
