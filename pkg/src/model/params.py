"""
Model parameters and the concrete occupation rates c_beta(n).

A site with n occupied neighbours becomes occupied at rate
exp(-beta * Gamma_{d-n}) for n < d and at rate 1 for n > d. At n = d both
readings of the model apply; the rate_at_d flag picks one.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
import yaml
from src.utils.errors import DomainError
from src.utils.helpers import PARAM_KEYS


class RateAtD(Enum):
    GAMMA_ZERO = "gamma-zero"
    ONE = "one"


@dataclass(frozen=True)
class ModelParams:
    dim: int
    gammas: tuple
    beta: float
    rate_at_d: RateAtD = RateAtD.GAMMA_ZERO

    def __post_init__(self):
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "rate_at_d", RateAtD(self.rate_at_d))

    def with_beta(self, beta: float) -> "ModelParams":
        return replace(self, beta=beta)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate(params: ModelParams) -> ValidationReport:
    """
    Checks the parameter constraints and names the first one violated
    ---
    Args:
        params (ModelParams): parameters to check
    Returns:
        ValidationReport: ok, or the first violated constraint
    """
    if params.dim < 0:
        return ValidationReport(False, "dim must be nonnegative")
    if len(params.gammas) != params.dim + 1:
        return ValidationReport(
            False, f"expected {params.dim + 1} gammas for dim {params.dim}, got {len(params.gammas)}"
        )
    if not all(math.isfinite(g) for g in params.gammas):
        return ValidationReport(False, "gammas must be finite")
    if params.gammas[0] < 0:
        return ValidationReport(False, "gammas must be nonnegative")
    if any(a > b for a, b in zip(params.gammas, params.gammas[1:])):
        return ValidationReport(False, "gammas not nondecreasing")
    if not (math.isfinite(params.beta) and params.beta > 0):
        return ValidationReport(False, "beta must be positive")
    return ValidationReport(True)


def require_valid(params: ModelParams) -> ModelParams:
    report = validate(params)
    if not report.ok:
        raise DomainError(f"invalid model parameters: {report.violation}")
    return params


def rate(params: ModelParams, n: int) -> float:
    """
    Occupation rate c_beta(n) of an empty site with n occupied neighbours
    """
    d = params.dim
    if not 0 <= n <= 2 * d:
        raise DomainError(f"neighbour count {n} outside [0, {2 * d}]")
    if n < d:
        return math.exp(-params.beta * params.gammas[d - n])
    if n > d:
        return 1.0
    if params.rate_at_d is RateAtD.GAMMA_ZERO:
        return math.exp(-params.beta * params.gammas[0])
    return 1.0


def rates(params: ModelParams) -> tuple:
    """
    The full rate table c_beta(0), ..., c_beta(2d)
    """
    return tuple(rate(params, n) for n in range(2 * params.dim + 1))


def parse_params(mapping: dict) -> ModelParams:
    """
    Builds parameters from a parsed config mapping; unknown or missing keys are
    rejected
    """
    unknown = sorted(set(mapping) - set(PARAM_KEYS))
    if unknown:
        raise DomainError(f"unknown parameter keys: {unknown}")
    missing = [key for key in ("dim", "gammas", "beta") if key not in mapping]
    if missing:
        raise DomainError(f"missing parameter keys: {missing}")
    gammas = mapping["gammas"]
    if not isinstance(gammas, (list, tuple)):
        raise DomainError(f"gammas must be a list, got {gammas!r}")
    try:
        params = ModelParams(
            dim=mapping["dim"],
            gammas=tuple(gammas),
            beta=mapping["beta"],
            rate_at_d=mapping.get("rate_at_d", RateAtD.GAMMA_ZERO.value),
        )
    except (TypeError, ValueError) as e:
        raise DomainError(f"malformed parameter value: {e}") from e
    return require_valid(params)


def load_params(path: str) -> ModelParams:
    """
    Reads model parameters from a YAML file with keys dim, gammas, beta and
    optionally rate_at_d
    ---
    Args:
        path (str): path to the YAML file
    Returns:
        ModelParams: validated parameters
    """
    with open(path) as f:
        mapping = yaml.safe_load(f) or {}
    if not isinstance(mapping, dict):
        raise DomainError(f"{path} does not hold a mapping")
    return parse_params(mapping)
