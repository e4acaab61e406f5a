"""
Theory calculator: critical constants kappa_i, critical length exponents L_i
and the exponents predicted for the relaxation time.
"""

import math
from dataclasses import dataclass
from src.model.params import ModelParams, require_valid
from src.utils.errors import DomainError

# volume exponent standing for the infinite lattice
INFINITE_VOLUME = math.inf


@dataclass(frozen=True)
class TheoryConstants:
    kappas: tuple
    lengths: tuple

    @property
    def kappa(self) -> float:
        return self.kappas[-1]

    @property
    def length(self) -> float:
        return self.lengths[-1]


def theory(params: ModelParams) -> TheoryConstants:
    """
    Runs the recursion kappa_0 = Gamma_0,
    kappa_i = max(Gamma_{i-1}, (Gamma_i + i kappa_{i-1}) / (i + 1)),
    and sets L_0 = 0, L_i = (Gamma_i - kappa_i) / i
    ---
    Args:
        params (ModelParams): valid parameters
    Returns:
        TheoryConstants: kappa_0..kappa_d and L_0..L_d
    """
    require_valid(params)
    gammas = params.gammas
    kappas = [gammas[0]]
    lengths = [0.0]
    for i in range(1, params.dim + 1):
        kappa = max(gammas[i - 1], (gammas[i] + i * kappas[i - 1]) / (i + 1))
        kappas.append(kappa)
        # kappa_i <= Gamma_i up to rounding
        lengths.append(max(0.0, (gammas[i] - kappa) / i))
    return TheoryConstants(kappas=tuple(kappas), lengths=tuple(lengths))


def _check_volume(volume_exponent: float) -> None:
    if math.isnan(volume_exponent) or volume_exponent < 0:
        raise DomainError(f"volume exponent must be >= 0, got {volume_exponent}")


def predicted_exponent(params: ModelParams, volume_exponent: float) -> float:
    """
    Relaxation-time exponent in a box of side exp(beta * L):
    max(Gamma_d - d L, kappa_d); INFINITE_VOLUME gives kappa_d
    """
    _check_volume(volume_exponent)
    kappa = theory(params).kappa
    if math.isinf(volume_exponent):
        return kappa
    return max(params.gammas[-1] - params.dim * volume_exponent, kappa)


def nucleation_exponent(params: ModelParams, volume_exponent: float) -> float:
    """
    Exponent of the time for the first nucleus in a box of side exp(beta * L)
    """
    _check_volume(volume_exponent)
    return params.gammas[-1] - params.dim * volume_exponent


def upper_bound_exponent(params: ModelParams, volume_exponent: float) -> float:
    """
    Nucleation, initial growth and covering time added up:
    max(Gamma_d - d L, Gamma_{d-1}, L + kappa_{d-1})
    """
    _check_volume(volume_exponent)
    if params.dim == 0:
        return params.gammas[0]
    previous = theory(params).kappas[-2]
    return max(
        params.gammas[-1] - params.dim * volume_exponent,
        params.gammas[-2],
        volume_exponent + previous,
    )


def lower_bound_exponent(params: ModelParams, volume_exponent: float) -> float:
    """
    Either a nucleus appears in the box or a droplet born outside crosses it:
    min(Gamma_d - d L, max(Gamma_{d-1}, L + kappa_{d-1}))
    """
    _check_volume(volume_exponent)
    if params.dim == 0:
        return params.gammas[0]
    previous = theory(params).kappas[-2]
    return min(
        params.gammas[-1] - params.dim * volume_exponent,
        max(params.gammas[-2], volume_exponent + previous),
    )


def droplet_diameter_exponent(params: ModelParams, time_exponent: float) -> float:
    """
    Heuristic growth law for a droplet after time exp(beta * K): diameter of
    order 1 while K < Gamma_{d-1}, then exp(beta (K - kappa_{d-1}))
    """
    if params.dim == 0:
        return 0.0
    if time_exponent < params.gammas[-2]:
        return 0.0
    return time_exponent - theory(params).kappas[-2]
