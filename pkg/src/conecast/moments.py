"""Closed-form second-order structure of the lattice field models (d=1).

`StouModel` describes the single-rate field: exponential kernel
exp(-mean_reversion * (t-s)) integrated over the backwards cone of slope
`cone_speed`. `MstouGammaModel` mixes the mean-reversion rate over a
Gamma(shape, rate) density, which turns the exponential correlation decay
into a power law.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .levy import GaussianSeed, NigSeed, seed_moments  # noqa: F401 (re-export)

__all__ = [
    "StouModel",
    "MstouGammaModel",
    "stou_corr",
    "stou_variance",
    "mstou_cov",
    "mstou_variance",
    "variogram_theoretical",
]


@dataclass(frozen=True)
class StouModel:
    """Space-time OU field parameters.

    mean_reversion : kernel decay rate in 1/time (must be > 0)
    cone_speed     : information propagation speed in space/time (> 0)
    seed           : the Levy seed driving the basis
    """

    mean_reversion: float
    cone_speed: float
    seed: object = None

    def __post_init__(self):
        if not self.mean_reversion > 0:
            raise InvalidParameterError("mean_reversion must be > 0")
        if not self.cone_speed > 0:
            raise InvalidParameterError("cone_speed must be > 0")

    @property
    def seed_variance(self):
        return seed_moments(self.seed).variance


@dataclass(frozen=True)
class MstouGammaModel:
    """Mixed model: mean-reversion rate Gamma(shape, rate) distributed.

    Finite second moments require shape > d + 1 = 2 in the spatial dimension
    d = 1 handled here.
    """

    shape: float
    rate: float
    cone_speed: float
    seed_variance: float

    def __post_init__(self):
        if not self.shape > 2:
            raise InvalidParameterError("Gamma shape must exceed 2 for d=1")
        if not (self.rate > 0 and self.cone_speed > 0 and self.seed_variance > 0):
            raise InvalidParameterError("rate, cone_speed, seed_variance must be > 0")


def stou_corr(model, tau, u):
    """Correlation at time lag tau and space lag u.

    min(exp(-A|tau|), exp(-A|u|/c)) with A the mean reversion and c the cone
    speed; tau=0 and u=0 give the purely spatial and temporal profiles.
    """
    a = model.mean_reversion
    return float(min(np.exp(-a * abs(tau)), np.exp(-a * abs(u) / model.cone_speed)))


def stou_variance(model, seed_variance=None):
    """Stationary variance: Var(seed) * c / (2 A^2)."""
    if seed_variance is None:
        seed_variance = model.seed_variance
    return seed_variance * model.cone_speed / (2.0 * model.mean_reversion**2)


def mstou_cov(model, tau, u):
    """Covariance of the Gamma-mixed model at lags (tau, u).

    Var(seed) * c * rate^shape /
      (2 * (rate + max(|tau|, |u|/c))^(shape-2) * (shape-2) * (shape-1))
    """
    if not model.shape > 2:
        raise InvalidParameterError("Gamma shape must exceed 2")
    al, be, c = model.shape, model.rate, model.cone_speed
    sep = max(abs(tau), abs(u) / c)
    return (
        model.seed_variance
        * c
        * be**al
        / (2.0 * (be + sep) ** (al - 2.0) * (al - 2.0) * (al - 1.0))
    )


def mstou_variance(model):
    """Stationary variance of the mixed model (lag-zero covariance)."""
    return mstou_cov(model, 0.0, 0.0)


def variogram_theoretical(model, lag, axis):
    """Normalized variogram along one axis: 2*(1 - correlation at that lag)."""
    if lag < 0:
        raise InvalidParameterError("lag must be non-negative")
    if axis == "time":
        return 2.0 * (1.0 - stou_corr(model, lag, 0.0))
    if axis == "space":
        return 2.0 * (1.0 - stou_corr(model, 0.0, lag))
    raise InvalidParameterError(f"axis must be 'time' or 'space', got {axis!r}")
