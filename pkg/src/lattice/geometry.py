"""
Box geometry for the d-dimensional lattice: regions, occupancy fields and
nearest-neighbour structure.

Sites are integer tuples. Inside a region, sites are indexed row-major with
axis 0 varying fastest, so index = sum_k (x_k - offset_k) * stride_k with
stride_0 = 1. Event logs and serialized fields rely on this order.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence
import numpy as np
from src.utils.errors import DomainError

# keeps flat indices inside int64 arithmetic
MAX_VOLUME = 2**62


@dataclass(frozen=True)
class BoxRegion:
    offset: tuple
    sides: tuple

    def __post_init__(self):
        offset = tuple(int(o) for o in self.offset)
        sides = tuple(int(s) for s in self.sides)
        if len(offset) != len(sides):
            raise DomainError(
                f"offset has {len(offset)} coordinates but sides has {len(sides)}"
            )
        if any(s < 1 for s in sides):
            raise DomainError(f"all sides must be >= 1, got {sides}")
        if int(np.prod(sides, dtype=object)) >= MAX_VOLUME:
            raise DomainError(f"region volume of sides {sides} overflows the index space")
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "sides", sides)

    @classmethod
    def cube(cls, dim: int, side: int, centered: bool = True) -> "BoxRegion":
        """
        Cubic box of the given side, centered on the origin (lower corner at
        -(side // 2)) or anchored at the origin
        """
        start = -(side // 2) if centered else 0
        return cls(offset=(start,) * dim, sides=(side,) * dim)

    @property
    def dim(self) -> int:
        return len(self.sides)

    @property
    def volume(self) -> int:
        return int(np.prod(self.sides, dtype=np.int64))

    @property
    def upper(self) -> tuple:
        return tuple(o + s - 1 for o, s in zip(self.offset, self.sides))

    @property
    def strides(self) -> tuple:
        strides, step = [], 1
        for side in self.sides:
            strides.append(step)
            step *= side
        return tuple(strides)

    def contains_site(self, site: Sequence[int]) -> bool:
        if len(site) != self.dim:
            return False
        return all(o <= x < o + s for x, o, s in zip(site, self.offset, self.sides))

    def contains_region(self, other: "BoxRegion") -> bool:
        if other.dim != self.dim:
            return False
        return self.contains_site(other.offset) and self.contains_site(other.upper)

    def index_of(self, site: Sequence[int]) -> int:
        if not self.contains_site(site):
            raise DomainError(f"site {tuple(site)} lies outside region {self}")
        return sum((x - o) * st for x, o, st in zip(site, self.offset, self.strides))

    def coords_of(self, index: int) -> tuple:
        if not 0 <= index < self.volume:
            raise DomainError(f"index {index} outside [0, {self.volume})")
        return tuple(
            o + (index // st) % s for o, s, st in zip(self.offset, self.sides, self.strides)
        )

    def expanded(self, k: int = 1) -> "BoxRegion":
        return BoxRegion(
            offset=tuple(o - k for o in self.offset),
            sides=tuple(s + 2 * k for s in self.sides),
        )

    def slab(self, axis: int, start: int, height: int) -> "BoxRegion":
        """
        Sub-box of the region restricted to coordinates [start, start + height)
        along the axis
        """
        offset = list(self.offset)
        sides = list(self.sides)
        offset[axis] = start
        sides[axis] = height
        sub = BoxRegion(offset=tuple(offset), sides=tuple(sides))
        if not self.contains_region(sub):
            raise DomainError(f"slab {sub} does not fit in {self}")
        return sub

    def faces(self, axis: int) -> tuple:
        """
        Lowest and highest coordinate of the region along the axis
        """
        if not 0 <= axis < self.dim:
            raise DomainError(f"axis {axis} invalid for dimension {self.dim}")
        return self.offset[axis], self.upper[axis]


@lru_cache(maxsize=64)
def region_coordinates(region: BoxRegion) -> np.ndarray:
    """
    (volume, d) array of site coordinates listed in index order
    """
    index = np.arange(region.volume, dtype=np.int64)
    columns = [
        (index // st) % s + o
        for o, s, st in zip(region.offset, region.sides, region.strides)
    ]
    if not columns:
        return np.zeros((region.volume, 0), dtype=np.int64)
    coords = np.stack(columns, axis=1)
    coords.flags.writeable = False
    return coords


@lru_cache(maxsize=64)
def neighbor_table(region: BoxRegion) -> np.ndarray:
    """
    Flat neighbour table of shape (volume, 2d); column 2k holds the - neighbour
    along axis k and column 2k + 1 the + neighbour. Missing neighbours hold
    the sentinel value region.volume.
    """
    volume = region.volume
    index = np.arange(volume, dtype=np.int64)
    coords = region_coordinates(region)
    table = np.full((volume, 2 * region.dim), volume, dtype=np.int64)
    for axis, (offset, side, stride) in enumerate(
        zip(region.offset, region.sides, region.strides)
    ):
        local = coords[:, axis] - offset
        table[:, 2 * axis] = np.where(local > 0, index - stride, volume)
        table[:, 2 * axis + 1] = np.where(local < side - 1, index + stride, volume)
    table.flags.writeable = False
    return table


def neighbors(site: Sequence[int], region: BoxRegion) -> list:
    """
    Returns the in-region sites at l1 distance 1 from site, axis by axis with
    the - neighbour before the + neighbour
    ---
    Args:
        site (Sequence[int]): coordinates of the site
        region (BoxRegion): the box the neighbours must belong to
    Returns:
        list[tuple]: neighbouring sites in deterministic order
    """
    if not region.contains_site(site):
        raise DomainError(f"site {tuple(site)} lies outside region {region}")
    found = []
    for axis in range(region.dim):
        for step in (-1, 1):
            other = list(site)
            other[axis] += step
            if region.contains_site(other):
                found.append(tuple(other))
    return found


def outer_neighbors(site: Sequence[int], region: BoxRegion) -> list:
    """
    Sites at l1 distance 1 from a region site that fall outside the region
    (the part of the neighbourhood seen through the boundary condition)
    """
    outside = []
    for axis in range(region.dim):
        for step in (-1, 1):
            other = list(site)
            other[axis] += step
            if not region.contains_site(other):
                outside.append(tuple(other))
    return outside


@dataclass(frozen=True, eq=False)
class Configuration:
    region: BoxRegion
    occupied: np.ndarray

    def __post_init__(self):
        bits = np.array(self.occupied, dtype=bool).reshape(-1)
        if bits.size != self.region.volume:
            raise DomainError(
                f"bit field has {bits.size} entries, region volume is {self.region.volume}"
            )
        bits.flags.writeable = False
        object.__setattr__(self, "occupied", bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.region == other.region and np.array_equal(
            self.occupied, other.occupied
        )

    def __hash__(self):
        return hash((self.region, self.occupied.tobytes()))

    @classmethod
    def empty(cls, region: BoxRegion) -> "Configuration":
        return cls(region, np.zeros(region.volume, dtype=bool))

    @classmethod
    def full(cls, region: BoxRegion) -> "Configuration":
        return cls(region, np.ones(region.volume, dtype=bool))

    @classmethod
    def from_sites(cls, region: BoxRegion, sites: Iterable[Sequence[int]]) -> "Configuration":
        bits = np.zeros(region.volume, dtype=bool)
        for site in sites:
            bits[region.index_of(site)] = True
        return cls(region, bits)

    @classmethod
    def from_grid(cls, region: BoxRegion, grid: np.ndarray) -> "Configuration":
        """
        Builds a configuration from an array shaped like region.sides
        (grid[x_0 - o_0, x_1 - o_1, ...])
        """
        grid = np.asarray(grid, dtype=bool)
        if grid.shape != region.sides:
            raise DomainError(f"grid shape {grid.shape} differs from sides {region.sides}")
        return cls(region, grid.ravel(order="F"))

    @property
    def grid(self) -> np.ndarray:
        """
        Read-only array view shaped like region.sides
        """
        return self.occupied.reshape(self.region.sides, order="F")

    @property
    def count(self) -> int:
        return int(self.occupied.sum())

    def is_occupied(self, site: Sequence[int]) -> bool:
        return bool(self.occupied[self.region.index_of(site)])

    def sites(self) -> list:
        coords = region_coordinates(self.region)
        return [tuple(row) for row in coords[np.flatnonzero(self.occupied)].tolist()]

    def with_sites(self, sites: Iterable[Sequence[int]]) -> "Configuration":
        bits = self.occupied.copy()
        for site in sites:
            bits[self.region.index_of(site)] = True
        return Configuration(self.region, bits)

    def restricted(self, subregion: BoxRegion) -> "Configuration":
        """
        The configuration seen inside a sub-box, as a configuration on that sub-box
        """
        if not self.region.contains_region(subregion):
            raise DomainError(f"{subregion} is not contained in {self.region}")
        start = [o - ro for o, ro in zip(subregion.offset, self.region.offset)]
        window = tuple(slice(a, a + s) for a, s in zip(start, subregion.sides))
        return Configuration.from_grid(subregion, self.grid[window])

    def embedded(self, region: BoxRegion) -> "Configuration":
        """
        Places the configuration inside a larger region, empty elsewhere
        """
        if not region.contains_region(self.region):
            raise DomainError(f"{self.region} is not contained in {region}")
        grid = np.zeros(region.sides, dtype=bool)
        start = [o - ro for o, ro in zip(self.region.offset, region.offset)]
        window = tuple(slice(a, a + s) for a, s in zip(start, self.region.sides))
        grid[window] = self.grid
        return Configuration.from_grid(region, grid)


def occupied_neighbor_count(config: Configuration, boundary, site: Sequence[int]) -> int:
    """
    Number of occupied neighbours of a site: in-region neighbours occupied in
    the configuration plus outside neighbours occupied by the boundary condition
    ---
    Args:
        config (Configuration): current occupancy of the region
        boundary (BoundaryCondition | None): boundary condition, None meaning empty
        site (Sequence[int]): the site whose neighbours are counted
    Returns:
        int: a count in [0, 2d]
    """
    region = config.region
    count = sum(config.is_occupied(other) for other in neighbors(site, region))
    if boundary is not None:
        count += sum(
            boundary.is_occupied(other, region) for other in outer_neighbors(site, region)
        )
    return int(count)
