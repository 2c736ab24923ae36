"""Levy seeds and increment sampling.

A Levy basis is an independently scattered, infinitely divisible random
measure; its *seed* is the unit-measure representative. Two seed families are
supported:

* Gaussian(mu, sigma): the basis evaluated on a set of Lebesgue measure v is
  N(mu*v, sigma^2*v).
* NIG(alpha, beta, mu, delta): the basis on measure v is
  NIG(alpha, beta, mu*v, delta*v); the location and scale parameters
  aggregate linearly under convolution while the steepness/asymmetry pair
  (alpha, beta) is preserved.

NIG sampling uses the normal variance-mean mixture representation
``X = mu + beta*W + sqrt(W)*Z`` with ``W`` inverse Gaussian, and the
inverse-Gaussian variate comes from the Michael-Schucany-Haas
transform-with-root method (exact, rejection free).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import InvalidParameterError

__all__ = [
    "GaussianSeed",
    "NigSeed",
    "SeedMoments",
    "seed_moments",
    "sample_increment",
    "sample_increments",
    "seed_from_dict",
    "UNIFORMS_PER_CELL",
]

# fixed uniform budget per lattice cell for counter-addressed generation;
# Gaussian consumes 1, NIG consumes 3, the rest are reserved padding
UNIFORMS_PER_CELL = 4


@dataclass(frozen=True)
class SeedMoments:
    """First two moments of the seed (unit Lebesgue measure)."""

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise InvalidParameterError("variance must be non-negative")


@dataclass(frozen=True)
class GaussianSeed:
    """Gaussian Levy seed with location `mu` and scale `sigma`."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameterError("Gaussian seed needs sigma > 0")


@dataclass(frozen=True)
class NigSeed:
    """Normal inverse Gaussian Levy seed.

    Parameters
    ----------
    alpha : float
        Tail steepness, alpha > 0.
    beta : float
        Asymmetry, |beta| < alpha.
    mu : float
        Location.
    delta : float
        Scale, delta > 0.
    """

    alpha: float
    beta: float
    mu: float
    delta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameterError("NIG seed needs alpha > 0")
        if not abs(self.beta) < self.alpha:
            raise InvalidParameterError("NIG seed needs |beta| < alpha")
        if not self.delta > 0:
            raise InvalidParameterError("NIG seed needs delta > 0")

    @property
    def gamma_bar(self):
        return float(np.sqrt(self.alpha**2 - self.beta**2))


def seed_from_dict(obj):
    """Build a seed from a plain mapping, e.g. a parsed config section."""
    kind = obj.get("kind", "").lower()
    if kind == "gaussian":
        return GaussianSeed(mu=float(obj["mu"]), sigma=float(obj["sigma"]))
    if kind == "nig":
        return NigSeed(
            alpha=float(obj["alpha"]),
            beta=float(obj["beta"]),
            mu=float(obj["mu"]),
            delta=float(obj["delta"]),
        )
    raise InvalidParameterError(f"unknown seed kind {kind!r}")


def seed_moments(seed):
    """Mean and variance of the seed over a unit-measure set.

    Gaussian gives (mu, sigma^2). NIG gives
    mean = mu + delta*beta/gamma_bar and
    variance = delta*alpha^2/gamma_bar^3 with gamma_bar = sqrt(alpha^2-beta^2).
    """
    if isinstance(seed, GaussianSeed):
        return SeedMoments(mean=seed.mu, variance=seed.sigma**2)
    if isinstance(seed, NigSeed):
        gb = seed.gamma_bar
        return SeedMoments(
            mean=seed.mu + seed.delta * seed.beta / gb,
            variance=seed.delta * seed.alpha**2 / gb**3,
        )
    raise InvalidParameterError(f"unsupported seed type {type(seed).__name__}")


def _inverse_gaussian_from_uniforms(mean, shape, u_chi, u_pick):
    """Inverse-Gaussian draws from two uniform arrays (root-selection method).

    `u_chi` feeds a chi-square(1) variate through the normal inverse CDF,
    `u_pick` selects between the two roots of the transform's quadratic.
    The large root is computed directly (its terms are all positive) and the
    small root through the root product mean^2, which avoids the cancellation
    the textbook small-root expression hits for tiny shape parameters.
    """
    nu = ndtri(u_chi) ** 2
    ratio = mean / shape
    root_large = mean + 0.5 * mean * ratio * nu + 0.5 * ratio * np.sqrt(
        4.0 * mean * shape * nu + (mean * nu) ** 2
    )
    root_small = mean**2 / root_large
    take_small = u_pick <= mean / (mean + root_small)
    return np.where(take_small, root_small, root_large)


def _nig_from_uniforms(seed, measure, u):
    """Vector of NIG(alpha, beta, mu*measure, delta*measure) variates.

    `u` has shape (n, 3): columns drive the mixing chi-square, the root
    choice, and the final normal.
    """
    delta_v = seed.delta * measure
    gb = seed.gamma_bar
    w = _inverse_gaussian_from_uniforms(
        mean=delta_v / gb, shape=delta_v**2, u_chi=u[:, 0], u_pick=u[:, 1]
    )
    z = ndtri(u[:, 2])
    return seed.mu * measure + seed.beta * w + np.sqrt(w) * z


def sample_increments(seed, measure, n, rng=None, uniforms=None):
    """n independent basis increments over disjoint cells of equal measure.

    Either an ``rng`` (numpy Generator) or a pre-drawn ``uniforms`` block of
    shape (n, UNIFORMS_PER_CELL) must be given; the latter path is what the
    counter-addressed simulator uses.
    """
    if measure < 0:
        raise InvalidParameterError("measure must be non-negative")
    if measure == 0:
        return np.zeros(n)
    if uniforms is None:
        if rng is None:
            raise InvalidParameterError("need rng or uniforms")
        uniforms = rng.random((n, UNIFORMS_PER_CELL))
        uniforms = np.clip(uniforms, 1e-300, 1.0 - 1e-16)
    if isinstance(seed, GaussianSeed):
        z = ndtri(uniforms[:, 0])
        return seed.mu * measure + seed.sigma * np.sqrt(measure) * z
    if isinstance(seed, NigSeed):
        return _nig_from_uniforms(seed, measure, uniforms[:, :3])
    raise InvalidParameterError(f"unsupported seed type {type(seed).__name__}")


def sample_increment(seed, measure, rng):
    """One basis increment over a cell of the given Lebesgue measure."""
    return float(sample_increments(seed, measure, 1, rng=rng)[0])
