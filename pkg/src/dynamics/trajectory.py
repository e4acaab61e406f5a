import math
from dataclasses import dataclass
from typing import Sequence
import numpy as np
import pandas as pd
from src.lattice.geometry import BoxRegion, Configuration, region_coordinates


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Time-ordered occupation events of one run. Sites are stored as indices
    into the region, together with the occupied-neighbour count each site
    had when it filled.
    """

    region: BoxRegion
    initial: Configuration
    times: np.ndarray
    sites: np.ndarray
    neighbor_counts: np.ndarray
    final: Configuration
    stop_reason: str
    final_time: float
    arrivals: int = 0

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def events(self) -> list:
        coords = region_coordinates(self.region)
        return [
            (float(t), tuple(coords[i].tolist()))
            for t, i in zip(self.times.tolist(), self.sites.tolist())
        ]

    def configuration_at(self, t: float) -> Configuration:
        bits = self.initial.occupied.copy()
        bits[self.sites[self.times <= t]] = True
        return Configuration(self.region, bits)

    def occupation_times(self) -> np.ndarray:
        """
        Per-site first occupation time: 0 when initially occupied, inf when
        never occupied during the run
        """
        when = np.full(self.region.volume, math.inf)
        when[self.initial.occupied] = 0.0
        when[self.sites] = self.times
        return when

    def first_occupation(self, site: Sequence[int]) -> float | None:
        t = self.occupation_times()[self.region.index_of(site)]
        return None if math.isinf(t) else float(t)

    def to_frame(self, neighbors: bool = False) -> pd.DataFrame:
        """
        Event log with columns time, x_1..x_d; `neighbors` adds the occupied
        neighbour count each site saw when it filled
        """
        coords = region_coordinates(self.region)[self.sites]
        frame = pd.DataFrame({"time": self.times})
        for axis in range(self.region.dim):
            frame[f"x_{axis + 1}"] = coords[:, axis]
        if neighbors:
            frame["neighbors"] = self.neighbor_counts
        return frame
