"""Truncated-loss learning over linear predictors and Gibbs ensembles.

The hypothesis class is affine: prediction = intercept + weights . features.
Risk is the absolute error clipped at an accuracy level epsilon. The
randomized Gibbs estimator draws predictors with density proportional to
exp(-sqrt(m) * empirical_risk(beta)) against a reference distribution; since
that weight never exceeds one, acceptance-rejection with the weight itself as
acceptance probability is exact and needs no envelope tuning.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidParameterError,
    SamplingFailureError,
)

__all__ = [
    "LinearPredictor",
    "PredictorGrid",
    "EnsembleForecast",
    "random_l1_grid",
    "truncated_loss",
    "empirical_risk",
    "erm",
    "gibbs_grid_weights",
    "gibbs_draw",
    "gibbs_draws",
    "gibbs_draw_exact",
    "ensemble_forecast",
    "aver_rmae",
]

GIBBS_PROPOSAL_CAP = 10**6
_BATCH = 4096


@dataclass(frozen=True)
class LinearPredictor:
    """Affine predictor with intercept beta0 and weight vector beta1."""

    intercept: float
    weights: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if not (np.isfinite(self.intercept) and np.all(np.isfinite(w))):
            raise InvalidParameterError("predictor coefficients must be finite")
        object.__setattr__(self, "weights", w)

    def predict(self, features):
        return float(self.intercept + np.dot(self.weights, features))

    @property
    def l1_norm(self):
        return float(abs(self.intercept) + np.sum(np.abs(self.weights)))

    @property
    def weights_l1(self):
        return float(np.sum(np.abs(self.weights)))


@dataclass(frozen=True)
class PredictorGrid:
    """Finite reference set of predictors, all inside the unit l1 ball."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if len(members) == 0:
            raise InvalidParameterError("grid must not be empty")
        for beta in members:
            if beta.l1_norm > 1.0 + 1e-12:
                raise InvalidParameterError("grid members must satisfy |beta|_1 <= 1")
        object.__setattr__(self, "members", members)

    @property
    def size(self):
        return len(self.members)


@dataclass(frozen=True)
class EnsembleForecast:
    draws: np.ndarray
    q25: float
    q50: float
    q75: float
    min: float
    max: float


def random_l1_grid(n_features, size, rng):
    """Grid of `size` predictors drawn uniformly from the unit l1 ball."""
    dim = n_features + 1
    simplex = rng.dirichlet(np.ones(dim + 1), size=size)[:, :dim]
    signs = rng.choice([-1.0, 1.0], size=(size, dim))
    coords = simplex * signs
    return PredictorGrid(
        members=tuple(
            LinearPredictor(intercept=row[0], weights=row[1:]) for row in coords
        )
    )


def truncated_loss(prediction, truth, epsilon):
    """Absolute error clipped at epsilon."""
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be > 0")
    return float(min(abs(prediction - truth), epsilon))


def empirical_risk(beta, training_set, epsilon):
    """Mean truncated loss of one predictor over the training set."""
    if training_set.m == 0:
        raise InvalidParameterError("empty training set")
    preds = training_set.inputs @ beta.weights + beta.intercept
    losses = np.minimum(np.abs(preds - training_set.outputs), epsilon)
    return float(np.mean(losses))


def _risk_matrix(intercepts, weights, training_set, epsilon):
    """Empirical risks of a batch of predictors; weights is (n, a_pc)."""
    preds = training_set.inputs @ weights.T + intercepts[None, :]
    losses = np.minimum(np.abs(preds - training_set.outputs[:, None]), epsilon)
    return losses.mean(axis=0)


def erm(grid, training_set, epsilon):
    """Grid member with minimal empirical risk, first occurrence winning ties."""
    best, best_risk = None, math.inf
    for beta in grid.members:
        r = empirical_risk(beta, training_set, epsilon)
        if r < best_risk:
            best, best_risk = beta, r
    return best


def gibbs_grid_weights(grid, training_set, epsilon):
    """Exact normalized Gibbs weights on a finite grid (enumeration oracle)."""
    scale = math.sqrt(training_set.m)
    logW = np.array(
        [-scale * empirical_risk(b, training_set, epsilon) for b in grid.members]
    )
    w = np.exp(logW - logW.max())
    return w / w.sum()


def _propose(reference, n, a_pc, rng):
    """Batch of proposals: (intercepts, weights, member_indices or None)."""
    if reference == "gaussian_std":
        coords = rng.standard_normal((n, a_pc + 1))
        return coords[:, 0], coords[:, 1:], None
    if isinstance(reference, PredictorGrid):
        idx = rng.integers(0, reference.size, size=n)
        inter = np.array([reference.members[i].intercept for i in idx])
        wts = np.array([reference.members[i].weights for i in idx])
        return inter, wts, idx
    raise InvalidParameterError(
        "reference must be 'gaussian_std' or a PredictorGrid"
    )


def _gibbs_batch(training_set, epsilon, reference, rng, n_wanted, max_proposals):
    """Accepted (intercept, weights) rows via acceptance-rejection.

    Proposal batches start near the requested count and grow when acceptance
    turns out low, so single draws stay cheap and bulk draws stay vectorized.
    """
    if training_set.m == 0:
        raise InvalidParameterError("empty training set")
    scale = math.sqrt(training_set.m)
    got_i, got_w = [], []
    used = 0
    batch = max(8, min(2 * n_wanted, _BATCH))
    while len(got_i) < n_wanted:
        n = min(batch, max_proposals - used)
        if n <= 0:
            rate = len(got_i) / max(used, 1)
            raise SamplingFailureError(
                f"Gibbs sampler exceeded {max_proposals} proposals "
                f"(acceptance rate {rate:.2e})",
                acceptance_rate=rate,
            )
        inter, wts, _ = _propose(reference, n, training_set.a_pc, rng)
        used += n
        risks = _risk_matrix(inter, wts, training_set, epsilon)
        accept = rng.random(n) <= np.exp(-scale * risks)
        got_i.extend(inter[accept])
        got_w.extend(wts[accept])
        if not np.any(accept):
            batch = min(2 * batch, _BATCH)
    return np.array(got_i[:n_wanted]), np.array(got_w[:n_wanted])


def gibbs_draw(training_set, epsilon, reference, rng,
               max_proposals=GIBBS_PROPOSAL_CAP):
    """One draw from the Gibbs density against the reference distribution."""
    inter, wts = _gibbs_batch(training_set, epsilon, reference, rng, 1,
                              max_proposals)
    return LinearPredictor(intercept=float(inter[0]), weights=wts[0])


def gibbs_draws(training_set, epsilon, reference, rng, n_draws,
                max_proposals=GIBBS_PROPOSAL_CAP):
    """n_draws independent Gibbs draws as one vectorized batch."""
    if n_draws < 1:
        raise InvalidParameterError("n_draws must be >= 1")
    inter, wts = _gibbs_batch(training_set, epsilon, reference, rng, n_draws,
                              max_proposals)
    return [LinearPredictor(intercept=float(b0), weights=w)
            for b0, w in zip(inter, wts)]


def gibbs_draw_exact(grid, training_set, epsilon, rng):
    """Exact finite-grid Gibbs draw by enumeration (oracle path)."""
    weights = gibbs_grid_weights(grid, training_set, epsilon)
    idx = rng.choice(len(weights), p=weights)
    return grid.members[idx]


def ensemble_forecast(training_set, features, n_draws, epsilon, reference, rng,
                      max_proposals=GIBBS_PROPOSAL_CAP):
    """n_draws Gibbs predictors applied to one feature vector.

    Quantiles use linear interpolation between closest ranks.
    """
    if n_draws < 1:
        raise InvalidParameterError("n_draws must be >= 1")
    features = np.asarray(features, dtype=float)
    if features.shape != (training_set.a_pc,):
        raise InvalidParameterError("features length must equal a_pc")
    inter, wts = _gibbs_batch(training_set, epsilon, reference, rng, n_draws,
                              max_proposals)
    draws = wts @ features + inter
    q25, q50, q75 = np.quantile(draws, [0.25, 0.5, 0.75])
    return EnsembleForecast(
        draws=draws,
        q25=float(q25),
        q50=float(q50),
        q75=float(q75),
        min=float(draws.min()),
        max=float(draws.max()),
    )


def aver_rmae(forecasts, truths):
    """Average relative mean absolute error over paired entries."""
    f = np.asarray(forecasts, dtype=float)
    t = np.asarray(truths, dtype=float)
    if f.shape != t.shape or f.ndim != 1 or f.size == 0:
        raise InvalidParameterError("forecasts and truths must be equal-length")
    if np.any(t == 0):
        raise InvalidParameterError("truth entries must be non-zero")
    return float(np.mean(np.abs(t - f) / np.abs(t)))
