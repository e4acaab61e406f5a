"""
Stop rules for growth runs. A rule is compiled against a region into
(reason, check) pairs; the engines evaluate the checks after every
occupation and stop at the first one that holds.
"""

import math
from dataclasses import dataclass
from typing import Sequence
from src.lattice.geometry import BoxRegion
from src.utils.errors import DomainError


class StopRule:
    reason = "stop"
    needs_clusters = False

    @property
    def time_limit(self) -> float:
        return math.inf

    def parts(self) -> tuple:
        return (self,)

    def compile(self, region: BoxRegion) -> list:
        return [(self.reason, self.check(region))]

    def check(self, region: BoxRegion):
        raise NotImplementedError

    def reachable(self, region: BoxRegion, can_fill: bool) -> bool:
        """
        Whether the rule can trigger in finite time on the region, given
        whether the dynamics can eventually fill it
        """
        return can_fill

    def __or__(self, other: "StopRule") -> "FirstOf":
        return FirstOf(*self.parts(), *other.parts())


@dataclass(frozen=True)
class OriginOccupied(StopRule):
    reason = "origin_occupied"

    def check(self, region):
        return SiteOccupied((0,) * region.dim).check(region)

    def reachable(self, region, can_fill):
        return can_fill and region.contains_site((0,) * region.dim)


@dataclass(frozen=True)
class SiteOccupied(StopRule):
    site: tuple = ()
    reason = "site_occupied"

    def check(self, region):
        if len(self.site) != region.dim:
            raise DomainError(f"stop site {self.site} has the wrong dimension for {region}")
        if not region.contains_site(self.site):
            return lambda state: False
        index = region.index_of(self.site)
        return lambda state: state.occupied[index]

    def reachable(self, region, can_fill):
        return can_fill and region.contains_site(self.site)


@dataclass(frozen=True)
class BoxFull(StopRule):
    reason = "box_full"

    def check(self, region):
        volume = region.volume
        return lambda state: state.n_occupied == volume


@dataclass(frozen=True)
class MaxClusterDiameter(StopRule):
    """
    Stops once some cluster has sup-norm diameter >= m
    """

    m: int = 0
    reason = "max_cluster_diameter"
    needs_clusters = True

    def check(self, region):
        if self.m < 0:
            raise DomainError(f"diameter threshold must be >= 0, got {self.m}")
        m = self.m
        return lambda state: state.tracker.largest >= m

    def reachable(self, region, can_fill):
        return can_fill and self.m <= max(region.sides, default=1) - 1


@dataclass(frozen=True)
class Crossed(StopRule):
    """
    Stops once a cluster touches both faces orthogonal to the axis
    """

    axis: int = 0
    reason = "crossed"
    needs_clusters = True

    def check(self, region):
        if not 0 <= self.axis < region.dim:
            raise DomainError(f"axis {self.axis} invalid for dimension {region.dim}")
        axis = self.axis
        return lambda state: state.tracker.crossed(axis)

    def reachable(self, region, can_fill):
        return can_fill


@dataclass(frozen=True)
class AnyOccupied(StopRule):
    reason = "any_occupied"

    def check(self, region):
        return lambda state: state.n_occupied > 0


@dataclass(frozen=True)
class TimeLimit(StopRule):
    horizon: float = math.inf
    reason = "time_limit"

    def __post_init__(self):
        if math.isnan(self.horizon) or self.horizon < 0:
            raise DomainError(f"time limit must be >= 0, got {self.horizon}")

    @property
    def time_limit(self) -> float:
        return float(self.horizon)

    def compile(self, region):
        # enforced by the engines through time_limit
        return []

    def reachable(self, region, can_fill):
        return math.isfinite(self.horizon)


class FirstOf(StopRule):
    """
    Stops at whichever of its rules holds first
    """

    def __init__(self, *rules: StopRule):
        if not rules:
            raise DomainError("FirstOf needs at least one rule")
        flat = []
        for rule in rules:
            flat.extend(rule.parts())
        self.rules = tuple(flat)

    def __repr__(self) -> str:
        return f"FirstOf{self.rules!r}"

    def __eq__(self, other) -> bool:
        return isinstance(other, FirstOf) and self.rules == other.rules

    def __hash__(self):
        return hash(self.rules)

    @property
    def needs_clusters(self) -> bool:
        return any(rule.needs_clusters for rule in self.rules)

    @property
    def time_limit(self) -> float:
        return min(rule.time_limit for rule in self.rules)

    def parts(self) -> tuple:
        return self.rules

    def compile(self, region):
        return [pair for rule in self.rules for pair in rule.compile(region)]

    def reachable(self, region, can_fill):
        return any(rule.reachable(region, can_fill) for rule in self.rules)


def first_of(rules: Sequence[StopRule]) -> StopRule:
    return rules[0] if len(rules) == 1 else FirstOf(*rules)


def parse_stop(text: str, dim: int) -> StopRule:
    """
    Reads a comma separated list such as "origin,time:50" or "diameter:7"
    ---
    Args:
        text (str): the rule list; names are origin, full, any, diameter:m,
            crossed:axis, time:t and site:x1/x2/...
        dim (int): lattice dimension, used for site rules
    Returns:
        StopRule: a single rule or FirstOf
    """
    rules = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, arg = part.partition(":")
        try:
            if name == "origin":
                rules.append(OriginOccupied())
            elif name == "full":
                rules.append(BoxFull())
            elif name == "any":
                rules.append(AnyOccupied())
            elif name == "diameter":
                rules.append(MaxClusterDiameter(int(arg)))
            elif name == "crossed":
                rules.append(Crossed(int(arg)))
            elif name == "time":
                rules.append(TimeLimit(float(arg)))
            elif name == "site":
                site = tuple(int(x) for x in arg.split("/")) if dim else ()
                if len(site) != dim:
                    raise DomainError(f"site {arg!r} needs {dim} coordinates")
                rules.append(SiteOccupied(site))
            else:
                raise DomainError(f"unknown stop rule {name!r}")
        except ValueError as e:
            if isinstance(e, DomainError):
                raise
            raise DomainError(f"stop rule {part!r}: {e}") from e
    if not rules:
        raise DomainError("no stop rule given")
    return first_of(rules)
