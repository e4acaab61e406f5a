"""
Exponent fits and distribution checks on experiment results.
"""

import math
from typing import NamedTuple, Sequence
import numpy as np
from scipy import stats
from src.harness.result import ExperimentResult
from src.utils.errors import DomainError
from src.utils.helpers import MIN_FIT_POINTS


class ExponentFit(NamedTuple):
    slope: float
    stderr: float
    intercept: float
    points: int


def fit_line(betas: Sequence[float], times: Sequence[float]) -> ExponentFit:
    """
    Least squares fit of ln(time) against beta
    ---
    Args:
        betas (Sequence[float]): inverse temperatures
        times (Sequence[float]): positive typical times, one per beta
    Returns:
        ExponentFit: slope, its standard error, intercept and point count
    """
    betas = np.asarray(betas, dtype=float)
    times = np.asarray(times, dtype=float)
    keep = np.isfinite(times) & (times > 0)
    betas, times = betas[keep], times[keep]
    if betas.size < MIN_FIT_POINTS:
        raise DomainError(
            f"need at least {MIN_FIT_POINTS} usable beta points to fit, got {betas.size}"
        )
    fit = stats.linregress(betas, np.log(times))
    return ExponentFit(float(fit.slope), float(fit.stderr), float(fit.intercept), int(betas.size))


def fit_exponent(result: ExperimentResult, observable: str | None = None) -> ExponentFit:
    """
    Fits ln(median) of an observable against beta over the uncensored rows
    ---
    Args:
        result (ExperimentResult): experiment output
        observable (str | None): row observable, default the only one present
            or relaxation_time
    Returns:
        ExponentFit: slope, standard error, intercept, number of points
    """
    summary = result.summary
    if observable is None:
        names = summary["observable"].unique().tolist()
        observable = names[0] if len(names) == 1 else "relaxation_time"
    picked = summary[(summary["observable"] == observable) & (summary["count"] > 0)]
    return fit_line(picked["beta"].tolist(), picked["median"].tolist())


def exponential_ks(samples: Sequence[float], rate: float):
    """
    One-sample Kolmogorov-Smirnov test against the exponential law of the
    given rate
    """
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    return stats.kstest(np.asarray(samples, dtype=float), "expon", args=(0.0, 1.0 / rate))


def binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)
