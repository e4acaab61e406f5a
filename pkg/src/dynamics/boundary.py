from dataclasses import dataclass
from enum import Enum
from typing import Sequence
import numpy as np
from src.lattice.geometry import BoxRegion, Configuration, region_coordinates
from src.model.params import ModelParams, rates
from src.utils.errors import DomainError


class BoundaryKind(Enum):
    EMPTY = "empty"
    FLOOR = "floor"
    SANDWICH = "sandwich"
    EXTERNAL = "external"


class ProcessVariant(Enum):
    FULL = "full"
    NON_NUCLEATING = "non-nucleating"


def variant_rates(params: ModelParams, variant: ProcessVariant) -> tuple:
    """
    Rate table used by a process variant; the non-nucleating process has
    c(0) = 0 and the full rates otherwise
    """
    table = list(rates(params))
    if ProcessVariant(variant) is ProcessVariant.NON_NUCLEATING:
        table[0] = 0.0
    return tuple(table)


@dataclass(frozen=True)
class BoundaryCondition:
    """
    Occupancy of the sites just outside a region. Floor occupies the layer
    below the region along the axis, Sandwich the layers below and above,
    External reads a configuration on the one-site shell around the region.
    """

    kind: BoundaryKind = BoundaryKind.EMPTY
    axis: int | None = None
    shell: Configuration | None = None

    @classmethod
    def empty(cls) -> "BoundaryCondition":
        return cls(BoundaryKind.EMPTY)

    @classmethod
    def floor(cls, axis: int) -> "BoundaryCondition":
        return cls(BoundaryKind.FLOOR, axis=axis)

    @classmethod
    def sandwich(cls, axis: int) -> "BoundaryCondition":
        return cls(BoundaryKind.SANDWICH, axis=axis)

    @classmethod
    def external(cls, shell: Configuration) -> "BoundaryCondition":
        return cls(BoundaryKind.EXTERNAL, shell=shell)

    @classmethod
    def parse(cls, text: str) -> "BoundaryCondition":
        """
        Reads "empty", "floor:<axis>" or "sandwich:<axis>"
        """
        name, _, axis = text.strip().lower().partition(":")
        if name == BoundaryKind.EMPTY.value and not axis:
            return cls.empty()
        if name in (BoundaryKind.FLOOR.value, BoundaryKind.SANDWICH.value):
            if not axis.isdigit():
                raise DomainError(f"boundary {text!r} needs an axis, e.g. '{name}:0'")
            return cls(BoundaryKind(name), axis=int(axis))
        raise DomainError(f"unknown boundary condition {text!r}")

    def __str__(self) -> str:
        if self.kind in (BoundaryKind.FLOOR, BoundaryKind.SANDWICH):
            return f"{self.kind.value}:{self.axis}"
        return self.kind.value

    def check(self, region: BoxRegion) -> None:
        if self.kind in (BoundaryKind.FLOOR, BoundaryKind.SANDWICH):
            if self.axis is None or not 0 <= self.axis < region.dim:
                raise DomainError(f"boundary axis {self.axis} invalid for dimension {region.dim}")
        if self.kind is BoundaryKind.EXTERNAL:
            if self.shell is None or self.shell.region != region.expanded(1):
                raise DomainError("external boundary must live on the one-site shell of the region")

    def _layer(self, region: BoxRegion, site: Sequence[int]) -> bool:
        # the layer occupies only sites stacked directly below/above the region
        inside = all(
            o <= x < o + s
            for k, (x, o, s) in enumerate(zip(site, region.offset, region.sides))
            if k != self.axis
        )
        if not inside:
            return False
        below = site[self.axis] == region.offset[self.axis] - 1
        above = site[self.axis] == region.upper[self.axis] + 1
        if self.kind is BoundaryKind.FLOOR:
            return below
        return below or above

    def is_occupied(self, site: Sequence[int], region: BoxRegion) -> bool:
        if region.contains_site(site) or self.kind is BoundaryKind.EMPTY:
            return False
        self.check(region)
        if self.kind is BoundaryKind.EXTERNAL:
            return self.shell.region.contains_site(site) and self.shell.is_occupied(site)
        return self._layer(region, site)

    def counts(self, region: BoxRegion) -> np.ndarray:
        """
        Occupied boundary neighbours of every region site, in index order
        """
        self.check(region)
        counts = np.zeros(region.volume, dtype=np.int64)
        if self.kind is BoundaryKind.EMPTY:
            return counts
        coords = region_coordinates(region)
        if self.kind in (BoundaryKind.FLOOR, BoundaryKind.SANDWICH):
            local = coords[:, self.axis] - region.offset[self.axis]
            counts += local == 0
            if self.kind is BoundaryKind.SANDWICH:
                counts += local == region.sides[self.axis] - 1
            return counts
        shell = self.shell.region
        for axis in range(region.dim):
            low, high = region.faces(axis)
            for step, face in ((-1, low), (1, high)):
                on_face = np.flatnonzero(coords[:, axis] == face)
                outside = coords[on_face].copy()
                outside[:, axis] += step
                index = ((outside - np.asarray(shell.offset)) * np.asarray(shell.strides)).sum(axis=1)
                counts[on_face] += self.shell.occupied[index]
        return counts

    def occupies_anything(self, region: BoxRegion) -> bool:
        return bool(self.counts(region).any())
