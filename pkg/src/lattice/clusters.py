"""
Occupied clusters: static labelling of a configuration and an incremental
tracker used while a growth process runs.
"""

from dataclasses import dataclass
import numpy as np
from scipy import ndimage
from src.lattice.geometry import (
    BoxRegion,
    Configuration,
    neighbor_table,
    region_coordinates,
)
from src.utils.errors import DomainError


@dataclass(frozen=True)
class Cluster:
    sites: tuple

    def __len__(self) -> int:
        return len(self.sites)


def _label(config: Configuration) -> tuple[np.ndarray, int]:
    """
    Nearest-neighbour labels of the occupied sites, flattened in index order
    """
    region = config.region
    if region.dim == 0:
        labels = config.occupied.astype(np.int64)
        return labels, int(labels.sum())
    structure = ndimage.generate_binary_structure(region.dim, 1)
    labels, count = ndimage.label(config.grid, structure=structure)
    return labels.ravel(order="F"), int(count)


def connected_clusters(config: Configuration) -> list:
    """
    Splits the occupied sites into maximal nearest-neighbour components
    ---
    Args:
        config (Configuration): the configuration to label
    Returns:
        list[Cluster]: clusters ordered by their smallest site index, sites
        inside a cluster listed in index order
    """
    labels, count = _label(config)
    if count == 0:
        return []
    coords = region_coordinates(config.region)
    occupied = np.flatnonzero(labels)
    # stable sort keeps index order within each label
    grouped = occupied[np.argsort(labels[occupied], kind="stable")]
    sizes = np.bincount(labels[occupied], minlength=count + 1)[1:]
    groups = np.split(grouped, np.cumsum(sizes)[:-1])
    groups.sort(key=lambda g: int(g[0]))
    return [Cluster(tuple(tuple(row) for row in coords[g].tolist())) for g in groups]


def diameter_sup(cluster: Cluster) -> int:
    """
    Sup-norm diameter: the largest coordinate spread over the axes
    """
    if len(cluster.sites) == 0:
        raise DomainError("diameter of an empty cluster is undefined")
    points = np.asarray(cluster.sites, dtype=np.int64)
    if points.ndim < 2 or points.shape[1] == 0:
        return 0
    return int((points.max(axis=0) - points.min(axis=0)).max())


def crosses(config: Configuration, axis: int) -> bool:
    """
    True iff one cluster touches both the minimal and the maximal face of
    the region along the axis
    """
    region = config.region
    if not 0 <= axis < region.dim:
        raise DomainError(f"axis {axis} invalid for dimension {region.dim}")
    labels, count = _label(config)
    if count == 0:
        return False
    grid = labels.reshape(region.sides, order="F")
    low = np.take(grid, 0, axis=axis)
    high = np.take(grid, region.sides[axis] - 1, axis=axis)
    shared = np.intersect1d(low[low > 0], high[high > 0])
    return bool(shared.size)


class ClusterTracker:
    """
    Union-find over occupied site indices that keeps each cluster's bounding
    box, so the largest sup-norm diameter and per-axis crossings are known
    after every occupation
    ---
    Args:
        region (BoxRegion): the box whose sites are being occupied
    """

    def __init__(self, region: BoxRegion):
        self.region = region
        self._coords = region_coordinates(region)
        self._table = neighbor_table(region)
        self._parent = {}
        self._size = {}
        self._lo = {}
        self._hi = {}
        self._crossed = [False] * region.dim
        # -1 while nothing is occupied
        self.largest = -1

    def __contains__(self, index: int) -> bool:
        return index in self._parent

    def find(self, index: int) -> int:
        root = index
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[index] != root:
            self._parent[index], index = root, self._parent[index]
        return root

    def _union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size.pop(rb)
        self._lo[ra] = [min(x, y) for x, y in zip(self._lo[ra], self._lo.pop(rb))]
        self._hi[ra] = [max(x, y) for x, y in zip(self._hi[ra], self._hi.pop(rb))]
        return ra

    def add(self, index: int) -> int:
        """
        Registers a newly occupied site and returns the largest diameter
        """
        if index in self._parent:
            return self.largest
        point = self._coords[index].tolist()
        self._parent[index] = index
        self._size[index] = 1
        self._lo[index] = list(point)
        self._hi[index] = list(point)
        root = index
        for other in self._table[index].tolist():
            if other in self._parent:
                root = self._union(root, other)
        self.largest = max(self.largest, self.diameter_of(root))
        lo, hi = self._lo[root], self._hi[root]
        for axis, (first, last) in enumerate(zip(self.region.offset, self.region.upper)):
            if lo[axis] == first and hi[axis] == last:
                self._crossed[axis] = True
        return self.largest

    def diameter_of(self, index: int) -> int:
        root = self.find(index)
        lo, hi = self._lo[root], self._hi[root]
        return max((h - l for l, h in zip(lo, hi)), default=0)

    def crossed(self, axis: int) -> bool:
        return self._crossed[axis]

    @property
    def size(self) -> int:
        return len(self._parent)
