"""
Observables on configurations: column projections, cluster statistics and
inclusion checks.
"""

import numpy as np
from src.lattice.clusters import connected_clusters, diameter_sup
from src.lattice.geometry import BoxRegion, Configuration
from src.utils.errors import DomainError


def _same_region(a: Configuration, b: Configuration) -> None:
    if a.region != b.region:
        raise DomainError(f"configurations live on {a.region} and {b.region}")


def project_columns(config: Configuration, axis: int) -> Configuration:
    """
    Projects along an axis: a base site is occupied iff some site of its
    column is occupied
    ---
    Args:
        config (Configuration): configuration of dimension d >= 1
        axis (int): axis collapsed by the projection
    Returns:
        Configuration: configuration on the (d-1)-dimensional base
    """
    region = config.region
    if region.dim == 0:
        raise DomainError("cannot project a zero-dimensional configuration")
    if not 0 <= axis < region.dim:
        raise DomainError(f"axis {axis} invalid for dimension {region.dim}")
    base = BoxRegion(
        offset=region.offset[:axis] + region.offset[axis + 1 :],
        sides=region.sides[:axis] + region.sides[axis + 1 :],
    )
    if base.dim == 0:
        return Configuration(base, np.array([config.occupied.any()]))
    return Configuration.from_grid(base, config.grid.any(axis=axis))


def cluster_diameters(config: Configuration) -> list:
    return [diameter_sup(cluster) for cluster in connected_clusters(config)]


def max_cluster_diameter(config: Configuration) -> int:
    # 0 for the empty configuration
    return max(cluster_diameters(config), default=0)


def contains(a: Configuration, b: Configuration) -> bool:
    """
    True iff every occupied site of a is occupied in b
    """
    _same_region(a, b)
    return bool(np.all(b.occupied[a.occupied]))


def union(a: Configuration, b: Configuration) -> Configuration:
    _same_region(a, b)
    return Configuration(a.region, a.occupied | b.occupied)


def density(config: Configuration) -> float:
    return config.count / config.region.volume
