"""
Threshold-two bootstrap percolation: closure, internally spanned boxes and
the rectangle-merging witness for spanned boxes of intermediate size.
"""

from collections import deque
import numpy as np
from src.lattice.clusters import connected_clusters, diameter_sup
from src.lattice.geometry import BoxRegion, Configuration, neighbor_table, region_coordinates
from src.utils.errors import DomainError

THRESHOLD = 2


def bootstrap_closure(config: Configuration) -> Configuration:
    """
    Occupies every empty site with at least two occupied neighbours inside the
    region, until no such site is left
    ---
    Args:
        config (Configuration): starting configuration
    Returns:
        Configuration: the smallest closed configuration containing it
    """
    region = config.region
    volume = region.volume
    table = neighbor_table(region)
    bits = config.occupied
    padded = np.append(bits, False)
    counts = padded[table].sum(axis=1).tolist()
    occupied = bits.tolist()
    queue = deque(np.flatnonzero(~bits & (np.asarray(counts) >= THRESHOLD)).tolist())
    while queue:
        index = queue.popleft()
        if occupied[index]:
            continue
        occupied[index] = True
        for other in table[index].tolist():
            if other < volume and not occupied[other]:
                counts[other] += 1
                if counts[other] == THRESHOLD:
                    queue.append(other)
    return Configuration(region, np.asarray(occupied, dtype=bool))


def internally_spanned(config: Configuration, subregion: BoxRegion) -> bool:
    """
    Whether the bootstrap dynamics run on the sites of the sub-box alone
    fills the sub-box
    """
    if not config.region.contains_region(subregion):
        raise DomainError(f"{subregion} is not contained in {config.region}")
    return bool(bootstrap_closure(config.restricted(subregion)).occupied.all())


def _gap(a: tuple, b: tuple) -> int:
    # l1 distance between two boxes given as (lo, hi)
    return sum(
        max(0, lo_b - hi_a, lo_a - hi_b)
        for lo_a, hi_a, lo_b, hi_b in zip(a[0], a[1], b[0], b[1])
    )


def al_witness(config: Configuration, k: int) -> BoxRegion | None:
    """
    Finds an internally spanned box whose sup-norm diameter lies in
    [k, 2k + 1], provided the closure has a cluster of diameter > 2k + 1.

    The closure is rebuilt as a union of boxes: every occupied site starts
    as its own box, and two boxes at l1 distance <= 2 are replaced by the
    smallest box holding both, which is again internally spanned. The first
    box reaching diameter k came from two boxes of diameter < k, so its
    diameter is at most 2k. Merging scans boxes in site index order, so the
    witness is deterministic.
    ---
    Args:
        config (Configuration): the configuration
        k (int): target scale, >= 1
    Returns:
        BoxRegion | None: the witness, or None when no closure cluster has
        diameter > 2k + 1
    """
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    closure = bootstrap_closure(config)
    if not any(diameter_sup(c) > 2 * k + 1 for c in connected_clusters(closure)):
        return None
    coords = region_coordinates(config.region)
    boxes = {}
    for index in np.flatnonzero(config.occupied).tolist():
        point = tuple(coords[index].tolist())
        boxes[index] = (point, point)
    pending = deque(boxes)
    fresh = config.region.volume
    while pending:
        a = pending.popleft()
        if a not in boxes:
            continue
        for b in boxes:
            if b != a and _gap(boxes[a], boxes[b]) <= THRESHOLD:
                break
        else:
            continue
        (lo_a, hi_a), (lo_b, hi_b) = boxes.pop(a), boxes.pop(b)
        lo = tuple(map(min, lo_a, lo_b))
        hi = tuple(map(max, hi_a, hi_b))
        if max(h - l for l, h in zip(lo, hi)) >= k:
            return BoxRegion(offset=lo, sides=tuple(h - l + 1 for l, h in zip(lo, hi)))
        boxes[fresh] = (lo, hi)
        pending.append(fresh)
        fresh += 1
    # unreachable when the closure has a cluster wider than 2k + 1
    raise RuntimeError("box merging ended without reaching the closure")
