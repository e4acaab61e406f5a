from dataclasses import dataclass
from typing import Sequence
import numpy as np
from src.dynamics.boundary import BoundaryCondition, ProcessVariant
from src.dynamics.engines import get_engine
from src.dynamics.stopping import StopRule, TimeLimit
from src.dynamics.trajectory import Trajectory
from src.lattice.geometry import BoxRegion, Configuration
from src.model.params import ModelParams
from src.randomness.field import GraphicalField
from src.utils.errors import DomainError
from src.utils.logging import setup_logger


@dataclass(frozen=True)
class CoupledRun:
    boundary: BoundaryCondition
    variant: ProcessVariant
    initial: Configuration
    stop: StopRule


def run_coupled(
    region: BoxRegion,
    params: ModelParams,
    runs: Sequence,
    field: GraphicalField,
    engine: str = "graphical",
) -> list:
    """
    Runs several processes on one region off the same graphical field, so
    ordered inputs give ordered trajectories
    ---
    Args:
        region (BoxRegion): the common region
        params (ModelParams): model parameters
        runs (Sequence[CoupledRun | tuple]): (boundary, variant, initial, stop) per run
        field (GraphicalField): shared arrivals
        engine (str): "graphical"; the fast engine does not couple runs
    Returns:
        list[Trajectory]: one trajectory per run, in input order
    """
    if engine != "graphical":
        raise DomainError("coupled runs need the graphical engine")
    runner = get_engine(engine)
    runs = [run if isinstance(run, CoupledRun) else CoupledRun(*run) for run in runs]
    for run in runs:
        if run.initial is not None and run.initial.region != region:
            raise DomainError(f"run starts on {run.initial.region}, not on the shared {region}")
    return [
        runner(region, params, run.boundary, run.variant, run.initial, field, run.stop)
        for run in runs
    ]


def multilayer_run(
    region: BoxRegion,
    params: ModelParams,
    axis: int,
    field: GraphicalField,
    horizon: float,
) -> Configuration:
    """
    Union of non-nucleating runs on consecutive height-2 slices along the
    axis, each sandwiched between occupied layers and started empty
    ---
    Args:
        region (BoxRegion): box with an even side along the axis
        params (ModelParams): model parameters
        axis (int): slicing axis
        field (GraphicalField): shared arrivals
        horizon (float): common time horizon
    Returns:
        Configuration: the union of the slice configurations at the horizon
    """
    logger = setup_logger("multilayer", "dynamics")
    if not 0 <= axis < region.dim:
        raise DomainError(f"axis {axis} invalid for dimension {region.dim}")
    height = region.sides[axis]
    if height % 2:
        raise DomainError(f"multilayer height must be even, got {height}")
    stop = TimeLimit(horizon)
    bits = np.zeros(region.volume, dtype=bool)
    for start in range(region.offset[axis], region.offset[axis] + height, 2):
        piece = region.slab(axis, start, 2)
        (trajectory,) = run_coupled(
            piece,
            params,
            [(BoundaryCondition.sandwich(axis), ProcessVariant.NON_NUCLEATING, None, stop)],
            field,
        )
        bits |= trajectory.final.embedded(region).occupied
    total = Configuration(region, bits)
    logger.debug(f"multilayer run on {region.sides}: {total.count} sites occupied by t={horizon}")
    return total


def ordering_violations(lower: Trajectory, upper: Trajectory) -> int:
    """
    Sites the lower run occupied strictly before the upper run did, within
    the time both runs observed
    """
    if lower.region != upper.region:
        raise DomainError("trajectories live on different regions")
    horizon = min(lower.final_time, upper.final_time)
    low, high = lower.occupation_times(), upper.occupation_times()
    ahead = (low <= horizon) & (low < high)
    return int(ahead.sum())
