"""
Growth engines. Both simulate the continuous-time process where an empty site
with n occupied neighbours fills at rate c(n); occupied sites stay occupied.

run_graphical replays the shared graphical field, so every run built on one
field is coupled to the others. run_fast samples the same law directly: sites
touching the occupied set carry their own exponential clocks, while all sites
with no occupied neighbour share a single nucleation clock.
"""

import heapq
import math
import numpy as np
from src.dynamics.boundary import BoundaryCondition, ProcessVariant, variant_rates
from src.dynamics.stopping import StopRule
from src.dynamics.trajectory import Trajectory
from src.lattice.clusters import ClusterTracker
from src.lattice.geometry import BoxRegion, Configuration, neighbor_table, region_coordinates
from src.model.params import ModelParams, require_valid
from src.randomness.field import GraphicalField
from src.utils.errors import DomainError
from src.utils.helpers import FAST_DRAW_BUFFER
from src.utils.logging import setup_logger


class _GrowthState:
    """
    Occupancy, neighbour counts and cluster bookkeeping shared by the engines.
    The checks read occupied, n_occupied and tracker.
    """

    def __init__(
        self,
        region: BoxRegion,
        boundary: BoundaryCondition,
        initial: Configuration,
        stop: StopRule,
    ):
        self.region = region
        self.volume = region.volume
        self.table = neighbor_table(region)
        bits = initial.occupied
        padded = np.append(bits, False)
        counts = boundary.counts(region) + padded[self.table].sum(axis=1)
        self.occupied = bits.tolist()
        self.counts = counts.tolist()
        self.n_occupied = int(bits.sum())
        self.tracker = None
        if stop.needs_clusters:
            self.tracker = ClusterTracker(region)
            for index in np.flatnonzero(bits).tolist():
                self.tracker.add(index)
        self.checks = stop.compile(region)
        self.times = []
        self.sites = []
        self.seen = []

    def occupy(self, index: int, time: float) -> list:
        """
        Fills a site and returns the empty neighbours whose count went up
        """
        self.occupied[index] = True
        self.n_occupied += 1
        self.times.append(time)
        self.sites.append(index)
        self.seen.append(self.counts[index])
        if self.tracker is not None:
            self.tracker.add(index)
        touched = []
        for other in self.table[index].tolist():
            if other < self.volume and not self.occupied[other]:
                self.counts[other] += 1
                touched.append(other)
        return touched

    def stop_reason(self) -> str | None:
        for reason, check in self.checks:
            if check(self):
                return reason
        return None

    def trajectory(self, initial, reason, final_time, arrivals=0) -> Trajectory:
        return Trajectory(
            region=self.region,
            initial=initial,
            times=np.asarray(self.times, dtype=float),
            sites=np.asarray(self.sites, dtype=np.int64),
            neighbor_counts=np.asarray(self.seen, dtype=np.int64),
            final=Configuration(self.region, np.asarray(self.occupied, dtype=bool)),
            stop_reason=reason,
            final_time=final_time,
            arrivals=arrivals,
        )


def _can_fill(region, boundary, variant, initial) -> bool:
    if ProcessVariant(variant) is ProcessVariant.FULL:
        return True
    return region.dim > 0 and (initial.count > 0 or boundary.occupies_anything(region))


def _prepare(region, params, boundary, variant, initial, stop):
    require_valid(params)
    if region.dim != params.dim:
        raise DomainError(f"region dimension {region.dim} differs from model dimension {params.dim}")
    boundary = boundary if boundary is not None else BoundaryCondition.empty()
    initial = initial if initial is not None else Configuration.empty(region)
    if initial.region != region:
        raise DomainError(f"initial configuration lives on {initial.region}, not {region}")
    boundary.check(region)
    state = _GrowthState(region, boundary, initial, stop)
    reason = state.stop_reason()
    horizon = stop.time_limit
    if reason is None and math.isinf(horizon):
        if not stop.reachable(region, _can_fill(region, boundary, variant, initial)):
            raise DomainError(f"stop rule {stop!r} can never trigger on {region} without a time limit")
    return state, initial, reason, horizon, variant_rates(params, variant)


def field_indices(field: GraphicalField, region: BoxRegion) -> np.ndarray:
    """
    Position in the field's region of every site of a sub-box
    """
    if not field.region.contains_region(region):
        raise DomainError(f"{region} is not covered by the field over {field.region}")
    coords = region_coordinates(region)
    if region.dim == 0:
        return np.zeros(1, dtype=np.int64)
    offset = np.asarray(field.region.offset)
    strides = np.asarray(field.region.strides)
    return ((coords - offset) * strides).sum(axis=1)


def run_graphical(
    region: BoxRegion,
    params: ModelParams,
    boundary: BoundaryCondition | None,
    variant: ProcessVariant,
    initial: Configuration | None,
    field: GraphicalField,
    stop: StopRule,
) -> Trajectory:
    """
    Runs the growth process driven by a graphical field: an empty site with n
    occupied neighbours fills at the first arrival whose mark is <= c(n)
    ---
    Args:
        region (BoxRegion): the box, contained in field.region
        params (ModelParams): model parameters
        boundary (BoundaryCondition | None): outside occupancy, None for empty
        variant (ProcessVariant): full or non-nucleating rates
        initial (Configuration | None): starting configuration, None for empty
        field (GraphicalField): shared arrivals
        stop (StopRule): when to stop
    Returns:
        Trajectory: events, final configuration and stop reason
    """
    logger = setup_logger("graphical_engine", "dynamics")
    state, initial, reason, horizon, thresholds = _prepare(
        region, params, boundary, variant, initial, stop
    )
    where = field_indices(field, region).tolist()
    version = [0] * state.volume
    heap = []

    # a miss pushes the end of the scanned chunk, so streams never run ahead
    # of the clock by more than one chunk
    def schedule(index: int, after: float) -> None:
        version[index] += 1
        threshold = thresholds[state.counts[index]]
        if threshold > 0:
            t, accepted = field.scan(where[index], after, threshold)
            heapq.heappush(heap, (t, index, version[index], accepted))

    now = 0.0
    if reason is None:
        for index in range(state.volume):
            if not state.occupied[index]:
                schedule(index, 0.0)
        while heap:
            t, index, stamp, accepted = heapq.heappop(heap)
            if stamp != version[index] or state.occupied[index]:
                continue
            if t > horizon:
                reason, now = "time_limit", horizon
                break
            if not accepted:
                schedule(index, t)
                continue
            now = t
            for other in state.occupy(index, t):
                schedule(other, t)
            reason = state.stop_reason()
            if reason is not None:
                break
        else:
            reason = "time_limit" if math.isfinite(horizon) else "exhausted"
            now = horizon if math.isfinite(horizon) else now

    # arrivals the clocks produced while the run was watching them
    arrivals = 0
    occupied_at = dict(zip(state.sites, state.times))
    for index in range(state.volume):
        if index in occupied_at:
            arrivals += field.count_arrivals(where[index], occupied_at[index])
        elif not initial.occupied[index]:
            arrivals += field.count_arrivals(where[index], now)

    logger.debug(
        f"graphical run on {region.sides}: {len(state.times)} events, "
        f"stopped by {reason} at t={now:.4g}"
    )
    return state.trajectory(initial, reason, now, arrivals)


class _Draws:
    __slots__ = ("rng", "size", "_exponential", "_uniform")

    def __init__(self, rng: np.random.Generator, size: int = FAST_DRAW_BUFFER):
        self.rng = rng
        self.size = size
        self._exponential = []
        self._uniform = []

    def exponential(self) -> float:
        if not self._exponential:
            self._exponential = self.rng.standard_exponential(self.size).tolist()
        return self._exponential.pop()

    def uniform(self) -> float:
        if not self._uniform:
            self._uniform = self.rng.random(self.size).tolist()
        return self._uniform.pop()


def run_fast(
    region: BoxRegion,
    params: ModelParams,
    boundary: BoundaryCondition | None,
    variant: ProcessVariant,
    initial: Configuration | None,
    field: GraphicalField,
    stop: StopRule,
) -> Trajectory:
    """
    Same law as run_graphical, sampled without replaying site clocks. Only
    the field's seed is used, so fast runs are reproducible but not coupled.
    """
    logger = setup_logger("fast_engine", "dynamics")
    state, initial, reason, horizon, rates = _prepare(
        region, params, boundary, variant, initial, stop
    )
    draws = _Draws(field.fast_generator())
    version = [0] * state.volume
    heap = []

    # empty sites without occupied neighbours, kept in an indexable pool
    nucleating = rates[0] > 0
    pool = np.full(state.volume, -1, dtype=np.int64)
    slot = np.full(state.volume, -1, dtype=np.int64)
    pooled = 0

    def unpool(index: int) -> None:
        nonlocal pooled
        position = slot[index]
        if position < 0:
            return
        pooled -= 1
        last = pool[pooled]
        pool[position] = last
        slot[last] = position
        slot[index] = -1

    def schedule(index: int, now: float) -> None:
        version[index] += 1
        c = rates[state.counts[index]]
        if c > 0:
            heapq.heappush(heap, (now + draws.exponential() / c, index, version[index]))

    counts = np.asarray(state.counts)
    empty = ~np.asarray(state.occupied, dtype=bool)
    for index in np.flatnonzero(empty & (counts > 0)).tolist():
        schedule(index, 0.0)
    if nucleating:
        lonely = np.flatnonzero(empty & (counts == 0))
        pooled = lonely.size
        pool[:pooled] = lonely
        slot[lonely] = np.arange(pooled)

    now = 0.0
    while reason is None:
        while heap and (heap[0][2] != version[heap[0][1]] or state.occupied[heap[0][1]]):
            heapq.heappop(heap)
        t_grow = heap[0][0] if heap else math.inf
        t_nucleate = math.inf
        if pooled:
            t_nucleate = now + draws.exponential() / (rates[0] * pooled)
        t = min(t_grow, t_nucleate)
        if t > horizon:
            reason, now = "time_limit", horizon
            break
        if math.isinf(t):
            reason = "exhausted"
            break
        if t_nucleate < t_grow:
            index = int(pool[int(draws.uniform() * pooled)])
            unpool(index)
        else:
            index = heapq.heappop(heap)[1]
        now = t
        for other in state.occupy(index, t):
            unpool(other)
            schedule(other, t)
        reason = state.stop_reason()

    logger.debug(
        f"fast run on {region.sides}: {len(state.times)} events, "
        f"stopped by {reason} at t={now:.4g}"
    )
    return state.trajectory(initial, reason, now)


ENGINE_RUNNERS = {"graphical": run_graphical, "fast": run_fast}


def get_engine(name: str):
    try:
        return ENGINE_RUNNERS[name]
    except KeyError:
        raise DomainError(f"unknown engine {name!r}, expected one of {sorted(ENGINE_RUNNERS)}") from None
