import math
from dataclasses import dataclass
import yaml
from src.dynamics.boundary import BoundaryCondition, ProcessVariant
from src.lattice.geometry import BoxRegion
from src.model.params import ModelParams, parse_params
from src.utils.errors import DomainError
from src.utils.helpers import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_WORKERS,
    ENGINES,
    EXPERIMENT_KEYS,
    EXPERIMENT_KINDS,
    PARAM_KEYS,
)


def integer_scale(beta: float, exponent: float) -> int:
    """
    Lattice scale ceil(exp(beta * exponent)), never below 1
    """
    value = beta * exponent
    if value > 700:
        raise DomainError(f"scale exp({value:.4g}) is too large for a lattice")
    return max(1, math.ceil(math.exp(value)))


@dataclass(frozen=True)
class ExperimentSpec:
    """
    One experiment over a grid of inverse temperatures. The box is either
    given by explicit sides or by the volume exponent L (a centered cube of
    side ceil(exp(beta L))); the horizon is a fixed value or exp(beta kappa).
    """

    kind: str
    params: ModelParams
    beta_grid: tuple
    L: float | None = None
    sides: tuple | None = None
    K: float | None = None
    height: int | None = None
    boundary: str = "empty"
    variant: str = ProcessVariant.FULL.value
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    kappa: float | None = None
    horizon: float | None = None
    engine: str = "graphical"
    stop: str = "origin"
    radius: int | None = None
    ladder: tuple | None = None
    threshold: str = "length"
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}")
        if not self.beta_grid:
            raise DomainError("beta grid must be nonempty")
        if any(b <= 0 for b in self.beta_grid):
            raise DomainError(f"every beta must be positive, got {self.beta_grid}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.engine not in ENGINES:
            raise DomainError(f"unknown engine {self.engine!r}")
        if self.stop not in ("origin", "full"):
            raise DomainError(f"relaxation stop must be 'origin' or 'full', got {self.stop!r}")
        if self.threshold not in ("length", "beta"):
            raise DomainError(f"threshold must be 'length' or 'beta', got {self.threshold!r}")
        if self.height is not None and (self.height < 2 or self.height % 2):
            raise DomainError(f"cylinder height must be even and >= 2, got {self.height}")
        if self.horizon is not None and not self.horizon >= 0:
            raise DomainError(f"horizon must be >= 0, got {self.horizon}")
        if self.sides is not None and len(self.sides) != self.params.dim:
            raise DomainError(f"sides {self.sides} do not match dimension {self.params.dim}")
        if self.workers == 0:
            raise DomainError("workers must be nonzero")
        ProcessVariant(self.variant)
        BoundaryCondition.parse(self.boundary)

    def params_at(self, beta: float) -> ModelParams:
        return self.params.with_beta(beta)

    def horizon_at(self, beta: float) -> float:
        if self.horizon is not None:
            return float(self.horizon)
        if self.kappa is None:
            return math.inf
        return math.exp(beta * self.kappa)

    def region_at(self, beta: float) -> BoxRegion:
        if self.sides is not None:
            return BoxRegion(
                offset=tuple(-(s // 2) for s in self.sides), sides=tuple(self.sides)
            )
        if self.L is None:
            raise DomainError("experiment needs either sides or a volume exponent L")
        return BoxRegion.cube(self.params.dim, integer_scale(beta, self.L))

    def height_at(self, beta: float) -> int:
        """
        Cylinder height for crossing experiments: the given height, else the
        smallest even number >= ceil(exp(beta L)) when L is set, else >= beta
        """
        if self.height is not None:
            return self.height
        target = integer_scale(beta, self.L) if self.L is not None else beta
        return max(2, 2 * math.ceil(target / 2))

    def to_dict(self) -> dict:
        echo = {
            "dim": self.params.dim,
            "gammas": list(self.params.gammas),
            "rate_at_d": self.params.rate_at_d.value,
        }
        for key in EXPERIMENT_KEYS:
            value = getattr(self, key)
            echo[key] = list(value) if isinstance(value, tuple) else value
        return echo


def parse_spec(mapping: dict) -> ExperimentSpec:
    """
    Builds an experiment from a parsed config mapping; unknown keys are
    rejected
    ---
    Args:
        mapping (dict): model keys (dim, gammas, beta, rate_at_d) and
            experiment keys
    Returns:
        ExperimentSpec: the validated experiment
    """
    mapping = {k: v for k, v in mapping.items() if v is not None}
    unknown = sorted(set(mapping) - set(PARAM_KEYS) - set(EXPERIMENT_KEYS))
    if unknown:
        raise DomainError(f"unknown experiment keys: {unknown}")
    grid = mapping.get("beta_grid")
    if grid is None and "beta" in mapping:
        grid = [mapping["beta"]]
    if not grid:
        raise DomainError("experiment needs beta or beta_grid")
    grid = tuple(float(b) for b in grid)
    model = {k: mapping[k] for k in PARAM_KEYS if k in mapping}
    model.setdefault("beta", grid[0])
    params = parse_params(model)
    options = {k: mapping[k] for k in EXPERIMENT_KEYS if k in mapping and k != "beta_grid"}
    for key in ("sides", "ladder"):
        if key in options:
            options[key] = tuple(int(v) for v in options[key])
    try:
        return ExperimentSpec(params=params, beta_grid=grid, **options)
    except TypeError as e:
        raise DomainError(f"malformed experiment: {e}") from e


def load_spec(path: str, overrides: dict | None = None) -> ExperimentSpec:
    """
    Reads an experiment from a YAML file, with optional overriding values
    """
    with open(path) as f:
        mapping = yaml.safe_load(f) or {}
    if not isinstance(mapping, dict):
        raise DomainError(f"{path} does not hold a mapping")
    mapping.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return parse_spec(mapping)
