"""Upper bounds on lexicographic weak-dependence coefficients.

theta-lex coefficients measure how much the field at a point can depend on
the field strictly in its lexicographic past at distance r. Everything here
evaluates computable upper bounds theta_tilde(r):

* single-rate field: exact exponential decay;
* Gamma-mixed field: exact power-type evaluator plus its asymptotic
  power-law summary;
* generic covariance-based bounds for spatial dimension 1 and 2;
* Gamma-mixed closed forms for arbitrary dimension (finite Gamma-ratio sums);
* the induced coefficient of the loss process of a predictor.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import InvalidParameterError

__all__ = [
    "ThetaDecay",
    "MstouThetaBound",
    "theta_lex_stou",
    "theta_lex_mstou",
    "theta_lex_covbound",
    "theta_lex_mstou_gamma",
    "theta_loss",
]


@dataclass(frozen=True)
class ThetaDecay:
    """Parametric decay profile theta_tilde(r).

    kind "exponential" evaluates prefactor*exp(-rate*r); kind "power"
    evaluates prefactor*r**(-rate) (infinite at r=0 by convention).
    """

    kind: str
    prefactor: float
    rate: float

    def __post_init__(self):
        if self.kind not in ("exponential", "power"):
            raise InvalidParameterError("kind must be 'exponential' or 'power'")
        if not (self.prefactor > 0 and self.rate > 0):
            raise InvalidParameterError("prefactor and rate must be > 0")

    def evaluate(self, r):
        if self.kind == "exponential":
            return self.prefactor * math.exp(-self.rate * r)
        if r <= 0:
            return math.inf
        return self.prefactor * r ** (-self.rate)


class MstouThetaBound:
    """Exact theta_tilde(r) for the Gamma-mixed model plus its power summary."""

    def __init__(self, model):
        if not model.shape > 2:
            raise InvalidParameterError("Gamma shape must exceed 2")
        self.model = model
        al, be, c = model.shape, model.rate, model.cone_speed
        self._front = model.seed_variance * c * be**al / ((al - 2.0) * (al - 1.0))
        self._slope = min(2.0, c) / c
        self.decay = ThetaDecay(
            kind="power",
            prefactor=math.sqrt(self._front) * self._slope ** (-(al - 2.0) / 2.0),
            rate=(al - 2.0) / 2.0,
        )

    def evaluate(self, r):
        al, be = self.model.shape, self.model.rate
        return math.sqrt(self._front * (be + r * self._slope) ** (-(al - 2.0)))


def theta_lex_stou(model, seed_variance=None):
    """Exponential decay profile of the single-rate field.

    rate = A*min(2,c)/(2c) and prefactor = sqrt(c*Var(seed))/A, so that
    theta_tilde(r)^2 = (c/A^2)*Var(seed)*exp(-2*rate*r).
    """
    if seed_variance is None:
        seed_variance = model.seed_variance
    a, c = model.mean_reversion, model.cone_speed
    return ThetaDecay(
        kind="exponential",
        prefactor=math.sqrt(c * seed_variance) / a,
        rate=a * min(2.0, c) / (2.0 * c),
    )


def theta_lex_mstou(model):
    """Exact power-type bound for the Gamma-mixed model.

    Returns a MstouThetaBound whose .evaluate(r) is
    sqrt( Var(seed)*c*rate^shape / ((shape-2)(shape-1))
          * (rate + r*min(2,c)/c)^-(shape-2) )
    and whose .decay carries the asymptotic power law with exponent
    (shape-2)/2.
    """
    return MstouThetaBound(model)


def theta_lex_covbound(cov_at, c, r, d):
    """Covariance-based theta-lex bound, agnostic to the kernel.

    d=1: 2*sqrt(2*cov_at(r*min(2,c))) where cov_at maps a spatial lag to the
    stationary covariance. d=2: 2*sqrt(2*cov_at((psi,psi)) +
    2*cov_at((psi,-psi))) with psi = r*min(1, c/sqrt(2)) and cov_at taking a
    2-vector spatial lag.
    """
    if r < 0:
        raise InvalidParameterError("r must be non-negative")
    if d == 1:
        val = 2.0 * cov_at(r * min(2.0, c))
    elif d == 2:
        psi = r * min(1.0, c / math.sqrt(2.0))
        val = 2.0 * cov_at((psi, psi)) + 2.0 * cov_at((psi, -psi))
    else:
        raise InvalidParameterError("d must be 1 or 2")
    if val < -1e-12:
        raise InvalidParameterError("covariance evaluator returned a negative value")
    return 2.0 * math.sqrt(max(val, 0.0))


def _ball_volume(d, radius):
    return math.pi ** (d / 2.0) * radius**d / math.gamma(d / 2.0 + 1.0)


def _gamma_ratio_sum(al, be, d, w):
    """sum_{k=0..d} w^k / (k! (w+be)^(al-d-1+k)) * Gamma(al-d-1+k)/Gamma(al)."""
    total = 0.0
    for k in range(d + 1):
        log_term = gammaln(al - d - 1 + k) - gammaln(al) - gammaln(k + 1)
        log_term += (k * math.log(w) if w > 0 else (0.0 if k == 0 else -math.inf))
        log_term -= (al - d - 1 + k) * math.log(w + be)
        total += math.exp(log_term) if np.isfinite(log_term) else 0.0
    return total


def theta_lex_mstou_gamma(model, d, r, moment_case, gamma_abs=None):
    """Closed-form theta-lex bound of the Gamma-mixed model in dimension d.

    moment_case "second" uses the seed variance; "first" uses the absolute
    first moment of the seed, supplied as gamma_abs. Requires Gamma shape
    > d+1. psi = r/((d+1)*sqrt(c^2+1)); the cone-speed branches c<=1 and c>1
    rescale the sum argument by 1/c.
    """
    al, be, c = model.shape, model.rate, model.cone_speed
    if d < 1:
        raise InvalidParameterError("d must be a positive integer")
    if not al > d + 1:
        raise InvalidParameterError("Gamma shape must exceed d+1")
    if r < 0:
        raise InvalidParameterError("r must be non-negative")
    psi = r / ((d + 1.0) * math.sqrt(c**2 + 1.0))
    vball = _ball_volume(d, c)
    dfact = math.factorial(d)
    if moment_case == "second":
        w = 2.0 * psi if c <= 1.0 else 2.0 * psi / c
        inner = (
            vball
            * dfact
            * model.seed_variance
            * be**al
            / 2.0 ** (d + 1)
            * _gamma_ratio_sum(al, be, d, w)
        )
        return 2.0 * math.sqrt(inner)
    if moment_case == "first":
        if gamma_abs is None:
            raise InvalidParameterError("moment_case 'first' needs gamma_abs")
        v = psi if c <= 1.0 else psi / c
        return 2.0 * vball * dfact * be**al * gamma_abs * _gamma_ratio_sum(al, be, d, v)
    raise InvalidParameterError("moment_case must be 'second' or 'first'")


def theta_loss(lip_term, a_pc, theta_tilde_r, mode):
    """theta coefficient of the loss process induced by a predictor.

    mode "lipschitz": 2*(lip_term*a_pc + 1)*theta_tilde_r with lip_term the
    predictor's Lipschitz constant and a_pc the input dimension. mode
    "linear": 2*(lip_term + 1)*theta_tilde_r with lip_term the l1 norm of the
    weight vector.
    """
    if theta_tilde_r < 0:
        raise InvalidParameterError("theta_tilde_r must be non-negative")
    if lip_term < 0:
        raise InvalidParameterError("lip_term must be non-negative")
    if mode == "lipschitz":
        return 2.0 * (lip_term * a_pc + 1.0) * theta_tilde_r
    if mode == "linear":
        return 2.0 * (lip_term + 1.0) * theta_tilde_r
    raise InvalidParameterError("mode must be 'lipschitz' or 'linear'")
