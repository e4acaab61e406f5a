"""
The graphical construction: every site owns a rate-one Poisson clock with a
uniform mark attached to each arrival. All processes built from one field are
coupled through these shared arrivals.

A site stream is a numpy Generator seeded from (seed, SITE_STREAM_KEY, site
index), so the i-th arrival time and mark of a site depend on nothing but the
seed, the site and i. Streams are materialized lazily, STREAM_CHUNK arrivals
at a time, and kept as a list of chunks.
"""

import bisect
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Sequence
import numpy as np
from src.lattice.geometry import BoxRegion, Configuration
from src.model.params import ModelParams, rate
from src.utils.errors import DomainError
from src.utils.helpers import FAST_ENGINE_KEY, SITE_STREAM_KEY, STREAM_CHUNK


class _SiteStream:
    __slots__ = ("rng", "time_chunks", "mark_chunks", "ends")

    def __init__(self, seed: int, index: int):
        self.rng = np.random.default_rng([seed, SITE_STREAM_KEY, index])
        self.time_chunks = []
        self.mark_chunks = []
        self.ends = []

    @property
    def horizon(self) -> float:
        return self.ends[-1] if self.ends else 0.0

    @property
    def size(self) -> int:
        return len(self.ends) * STREAM_CHUNK

    @property
    def times(self) -> np.ndarray:
        return np.concatenate(self.time_chunks) if self.time_chunks else np.empty(0)

    @property
    def marks(self) -> np.ndarray:
        return np.concatenate(self.mark_chunks) if self.mark_chunks else np.empty(0)

    def extend(self) -> None:
        gaps = self.rng.standard_exponential(STREAM_CHUNK)
        marks = self.rng.random(STREAM_CHUNK)
        times = self.horizon + np.cumsum(gaps)
        self.time_chunks.append(times)
        self.mark_chunks.append(marks)
        self.ends.append(float(times[-1]))

    def extend_past(self, until: float) -> None:
        while self.horizon <= until:
            self.extend()

    def position(self, after: float) -> int:
        """
        Number of arrivals in [0, after]
        """
        self.extend_past(after)
        chunk = bisect.bisect_right(self.ends, after)
        return chunk * STREAM_CHUNK + int(np.searchsorted(self.time_chunks[chunk], after, side="right"))

    def arrival(self, j: int) -> tuple:
        while j >= self.size:
            self.extend()
        chunk, offset = divmod(j, STREAM_CHUNK)
        return float(self.time_chunks[chunk][offset]), float(self.mark_chunks[chunk][offset])

    def scan(self, after: float, threshold: float) -> tuple:
        """
        First arrival after `after` with mark <= threshold, looking no further
        than the end of the chunk holding the next arrival
        ---
        Returns:
            tuple[float, bool]: (arrival time, True) on a hit, otherwise
                (chunk end, False)
        """
        chunk, offset = divmod(self.position(after), STREAM_CHUNK)
        hits = np.flatnonzero(self.mark_chunks[chunk][offset:] <= threshold)
        if hits.size:
            return float(self.time_chunks[chunk][offset + hits[0]]), True
        return self.ends[chunk], False


@dataclass
class GraphicalField:
    seed: int
    region: BoxRegion
    _streams: dict = dataclass_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError(f"seed must be a 64-bit nonnegative integer, got {self.seed}")
        self.seed = int(self.seed)

    def stream(self, index: int) -> _SiteStream:
        stream = self._streams.get(index)
        if stream is None:
            if not 0 <= index < self.region.volume:
                raise DomainError(f"site index {index} outside the field region")
            stream = _SiteStream(self.seed, index)
            self._streams[index] = stream
        return stream

    def index_of(self, site: Sequence[int]) -> int:
        return self.region.index_of(site)

    def materialized(self) -> int:
        """
        Arrivals generated so far over all site streams
        """
        return sum(stream.size for stream in self._streams.values())

    def next_event(self, site: Sequence[int], after: float) -> tuple:
        """
        Earliest arrival strictly after `after` at a site, with its mark
        ---
        Args:
            site (Sequence[int]): site coordinates inside the field region
            after (float): time threshold, >= 0
        Returns:
            tuple[float, float]: (arrival time, mark)
        """
        if after < 0:
            raise DomainError(f"after must be >= 0, got {after}")
        stream = self.stream(self.index_of(site))
        return stream.arrival(stream.position(after))

    def scan(self, index: int, after: float, threshold: float) -> tuple:
        """
        One bounded step of the search for the next accepting arrival; see
        _SiteStream.scan. Engines call it again from the chunk end on a miss.
        """
        return self.stream(index).scan(after, threshold)

    def next_accepting(
        self, index: int, after: float, threshold: float, until: float = math.inf
    ) -> float | None:
        """
        Time of the first arrival after `after` whose mark is <= threshold, or
        None when there is none up to `until`. Arrivals with larger marks
        cannot occupy the site at this threshold and are skipped.
        """
        if threshold <= 0 or after >= until:
            return None
        while True:
            t, accepted = self.scan(index, after, threshold)
            if accepted:
                return t if t <= until else None
            if t > until:
                return None
            after = t

    def count_arrivals(self, index: int, until: float) -> int:
        """
        Number of arrivals at a site in [0, until]
        """
        return self.stream(index).position(until)

    def rang_below(self, index: int, until: float, threshold: float) -> bool:
        """
        Whether some arrival up to `until` carries a mark <= threshold
        """
        if until <= 0:
            return False
        return self.next_accepting(index, 0.0, threshold, until) is not None

    def fast_generator(self) -> np.random.Generator:
        """
        Independent generator for engines that do not replay site streams
        """
        return np.random.default_rng([self.seed, FAST_ENGINE_KEY])


def bernoulli_snapshot(
    field: GraphicalField, params: ModelParams, k: int, horizon: float
) -> Configuration:
    """
    Occupies every site whose clock rang before the horizon with a mark below
    c_beta(k); the sites are independent Bernoulli(1 - exp(-c_beta(k) horizon))
    ---
    Args:
        field (GraphicalField): the shared arrivals
        params (ModelParams): model parameters, fixing c_beta
        k (int): rate index in [0, 2d]
        horizon (float): time horizon, >= 0
    Returns:
        Configuration: snapshot over field.region
    """
    if horizon < 0:
        raise DomainError(f"horizon must be >= 0, got {horizon}")
    threshold = rate(params, k)
    bits = np.zeros(field.region.volume, dtype=bool)
    if horizon > 0:
        for index in range(field.region.volume):
            bits[index] = field.rang_below(index, horizon, threshold)
    return Configuration(field.region, bits)
