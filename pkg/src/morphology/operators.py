import math
import numpy as np
from scipy import ndimage
from src.lattice.geometry import Configuration
from src.morphology.bootstrap import bootstrap_closure
from src.utils.errors import DomainError


def dilate(config: Configuration, l: int) -> Configuration:
    """
    Occupies every site at sup-norm distance < l from an occupied site,
    clipped to the region
    ---
    Args:
        config (Configuration): configuration to dilate
        l (int): radius, >= 0; 0 gives the empty configuration, 1 the input
    Returns:
        Configuration: the dilated configuration
    """
    if l < 0:
        raise DomainError(f"dilation radius must be >= 0, got {l}")
    region = config.region
    if l == 0:
        return Configuration.empty(region)
    if l == 1 or region.dim == 0 or not config.occupied.any():
        return config
    grid = ndimage.maximum_filter(
        config.grid.astype(np.uint8), size=2 * l - 1, mode="constant", cval=0
    )
    return Configuration.from_grid(region, grid > 0)


def complement(config: Configuration) -> Configuration:
    return Configuration(config.region, ~config.occupied)


def erode(config: Configuration, l: int) -> Configuration:
    """
    Empties every site at sup-norm distance < l from an empty site of the
    region; the complement of the dilated complement
    """
    if l < 0:
        raise DomainError(f"erosion radius must be >= 0, got {l}")
    return complement(dilate(complement(config), l))


def domination_pipeline(eta: Configuration, l: int) -> tuple:
    """
    Builds rho = closure(dilate(eta, l)) and xi = erode(rho, ceil(l / 2)),
    which satisfy eta <= xi <= rho
    ---
    Args:
        eta (Configuration): nucleation snapshot
        l (int): dilation radius, >= 2
    Returns:
        tuple[Configuration, Configuration]: (rho, xi)
    """
    if l < 2:
        raise DomainError(f"domination radius must be >= 2, got {l}")
    rho = bootstrap_closure(dilate(eta, l))
    xi = erode(rho, math.ceil(l / 2))
    return rho, xi
