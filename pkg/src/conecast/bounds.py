"""Generalization-gap bounds and the Monte-Carlo Laplace-transform check.

Each bound evaluator returns a BoundReport whose `value` is the exact sum of
its named `components`, so callers can see which addend dominates. The
dependence of the data enters through caller-supplied theta coefficients;
expectation terms under the reference distribution are plain scalars with
documented defaults.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .embed import build_training_set, cone_offsets
from .errors import InvalidParameterError
from .field_sim import simulate_stou
from .learn import LinearPredictor
from .theta import theta_lex_stou, theta_loss

__all__ = [
    "BoundReport",
    "ValidationReport",
    "kl_dirac_uniform",
    "chisq_plus_one_dirac_uniform",
    "bound_typeI_erm",
    "bound_typeI_general",
    "bound_typeII",
    "bound_typeII_erm",
    "bound_gibbs_typeI",
    "bound_gibbs_typeII",
    "exp_inequality_rhs",
    "admissible_s_grid",
    "validate_exp_inequality",
]


@dataclass(frozen=True)
class BoundReport:
    """One evaluated high-probability bound.

    value always equals the sum of the named components; confidence is the
    probability with which the bound holds.
    """

    bound_type: str
    epsilon: float
    delta: float
    m: int
    value: float
    components: dict
    confidence: float

    def __post_init__(self):
        if not math.isclose(self.value, sum(self.components.values()),
                            rel_tol=1e-12, abs_tol=1e-12):
            raise InvalidParameterError("value must equal sum of components")
        if self.value < 0:
            raise InvalidParameterError("bound value must be >= 0")
        if not 0 < self.confidence < 1:
            raise InvalidParameterError("confidence must lie in (0,1)")

    def to_dict(self):
        return {
            "bound_type": self.bound_type,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "m": self.m,
            "value": self.value,
            "components": dict(self.components),
            "confidence": self.confidence,
        }


def kl_dirac_uniform(n_grid):
    """KL divergence of a point mass against the uniform law on n_grid atoms."""
    if n_grid < 1:
        raise InvalidParameterError("n_grid must be >= 1")
    return math.log(n_grid)


def chisq_plus_one_dirac_uniform(n_grid):
    """Chi-square divergence plus one for a point mass vs uniform on n_grid atoms."""
    if n_grid < 1:
        raise InvalidParameterError("n_grid must be >= 1")
    return float(n_grid)


def _check_delta(delta):
    if not 0 < delta < 1:
        raise InvalidParameterError("delta must lie in (0,1)")


def _moment_factor(epsilon):
    # exp moment of the clipped loss; finite only for epsilon < 3
    if not 0 < epsilon < 3:
        raise InvalidParameterError("epsilon must lie in (0,3) for this bound")
    return math.exp(3 * epsilon**2 / (2 * (3 - epsilon)))


def bound_typeI_erm(epsilon, delta, m, n_grid, pi_theta_term=4.0):
    """Square-root-rate bound for the grid minimizer.

    pi_theta_term is the reference expectation of the loss-process dependence
    prefactor; the default 4 corresponds to weight norm 1 and unit decay
    prefactor.
    """
    _check_delta(delta)
    if m < 2:
        raise InvalidParameterError("m must be >= 2")
    root_m = math.sqrt(m)
    divergence = math.log(n_grid / delta) / root_m
    moment_theta = math.log(_moment_factor(epsilon)
                            + 3 * root_m * pi_theta_term) / root_m
    return BoundReport(
        bound_type="typeI_erm",
        epsilon=epsilon,
        delta=delta,
        m=m,
        value=divergence + moment_theta,
        components={"divergence": divergence, "moment_theta": moment_theta},
        confidence=1 - 2 * delta,
    )


def bound_typeI_general(epsilon, delta, m, k, kl, theta_k):
    """Square-root-rate bound with k-block subsampling and explicit divergence."""
    _check_delta(delta)
    blocks = m // k
    if blocks < 2:
        raise InvalidParameterError("floor(m/k) must be >= 2")
    root_l = math.sqrt(blocks)
    divergence = (kl + math.log(1 / delta)) / root_l
    moment_theta = math.log(_moment_factor(epsilon)
                            + 3 * root_l * math.exp(3 * root_l) * theta_k) / root_l
    return BoundReport(
        bound_type="typeI_general",
        epsilon=epsilon,
        delta=delta,
        m=m,
        value=divergence + moment_theta,
        components={"divergence": divergence, "moment_theta": moment_theta},
        confidence=1 - 2 * delta,
    )


def bound_typeII(epsilon, delta, m, eta, kl, chisq_plus_one,
                 pi_theta1_over_delta):
    """Fixed-time bound with a free temperature eta."""
    _check_delta(delta)
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be > 0")
    if not eta > 0:
        raise InvalidParameterError("eta must be > 0")
    divergence = kl / (eta * m)
    eta_term = eta * epsilon**2 / 2
    theta_term = math.sqrt(epsilon * pi_theta1_over_delta * chisq_plus_one)
    return BoundReport(
        bound_type="typeII",
        epsilon=epsilon,
        delta=delta,
        m=m,
        value=divergence + eta_term + theta_term,
        components={
            "divergence": divergence,
            "eta": eta_term,
            "theta": theta_term,
        },
        confidence=1 - 3 * delta,
    )


def bound_typeII_erm(epsilon, delta, m, n_grid, theta_tilde_r,
                     pi_beta1=1.0, decay_prefactor=1.0):
    """Fixed-time bound at the temperature that collapses the first two addends.

    theta_tilde_r is the field coefficient at the gap between consecutive
    examples; the loss-process prefactor 2·(pi_beta1 + 1)·decay_prefactor
    multiplies it inside the square root.
    """
    _check_delta(delta)
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be > 0")
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    divergence_eta = math.sqrt(2 * math.log(n_grid / delta) / m)
    loss_theta = 2 * (pi_beta1 + 1) * decay_prefactor * theta_tilde_r
    theta_term = math.sqrt(epsilon * loss_theta * n_grid / delta)
    return BoundReport(
        bound_type="typeII",
        epsilon=epsilon,
        delta=delta,
        m=m,
        value=divergence_eta + theta_term,
        components={"divergence_eta": divergence_eta, "theta": theta_term},
        confidence=1 - 3 * delta,
    )


def bound_gibbs_typeI(epsilon, delta, m, inf_term, theta_1):
    """Oracle-style bound for the randomized estimator, square-root rate.

    inf_term carries the posterior risk plus divergence addends, which the
    caller evaluates; this function adds the moment/dependence remainder.
    """
    _check_delta(delta)
    if m < 2:
        raise InvalidParameterError("m must be >= 2")
    root_m = math.sqrt(m)
    moment_theta = 2 * math.log(_moment_factor(epsilon)
                                + 3 * root_m * math.exp(3 * root_m) * theta_1
                                ) / root_m
    return BoundReport(
        bound_type="gibbs_typeI",
        epsilon=epsilon,
        delta=delta,
        m=m,
        value=inf_term + moment_theta,
        components={"oracle": inf_term, "moment_theta": moment_theta},
        confidence=1 - 2 * delta,
    )


def bound_gibbs_typeII(epsilon, delta, m, kl, chisq_plus_one,
                       pi_theta1_over_delta):
    """Fixed-time bound for the randomized estimator; temperature 1/sqrt(m)."""
    _check_delta(delta)
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be > 0")
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    root_m = math.sqrt(m)
    divergence = (kl + math.log(1 / delta)) * 2 / root_m
    eta_term = epsilon**2 / root_m
    theta_term = 2 * math.sqrt(epsilon * pi_theta1_over_delta * chisq_plus_one)
    return BoundReport(
        bound_type="gibbs_typeII",
        epsilon=epsilon,
        delta=delta,
        m=m,
        value=divergence + eta_term + theta_term,
        components={
            "divergence": divergence,
            "eta": eta_term,
            "theta": theta_term,
        },
        confidence=1 - 4 * delta,
    )


def exp_inequality_rhs(s, m, k, variance, range_len, theta_k):
    """Upper bound for the Laplace transform of the centred loss average."""
    blocks = m // k
    if blocks < 2:
        raise InvalidParameterError("floor(m/k) must be >= 2")
    if not 0 < s < 3 * blocks / range_len:
        raise InvalidParameterError("s outside admissible range")
    block_term = math.exp(s**2 * variance
                          / (2 * blocks * (1 - s * range_len / (3 * blocks))))
    return block_term + math.exp(s * range_len) * theta_k * s


def admissible_s_grid(m, k, range_len, n_points=10, fraction=0.95):
    """Evenly spaced s values covering (0, fraction * upper admissible limit]."""
    blocks = m // k
    if blocks < 2:
        raise InvalidParameterError("floor(m/k) must be >= 2")
    limit = 3 * blocks / range_len
    return np.linspace(limit * fraction / n_points, limit * fraction, n_points)


@dataclass(frozen=True)
class ValidationReport:
    """Monte-Carlo check of the Laplace-transform inequality.

    rows hold dicts with keys side, s, lhs, lhs_stderr, rhs; max_violation is
    the largest lhs - rhs over all rows (negative when the bound holds with
    margin) and max_violation_sigma the largest (lhs - rhs)/lhs_stderr.
    """

    epsilon: float
    m: int
    k: int
    n_paths: int
    theta_k: float
    rows: list = field(default_factory=list)

    @property
    def max_violation(self):
        return max(row["lhs"] - row["rhs"] for row in self.rows)

    @property
    def max_violation_sigma(self):
        worst = -math.inf
        for row in self.rows:
            se = max(row["lhs_stderr"], 1e-300)
            worst = max(worst, (row["lhs"] - row["rhs"]) / se)
        return worst

    def holds(self, n_stderr=3.0):
        return all(row["lhs"] <= row["rhs"] + n_stderr * row["lhs_stderr"]
                   for row in self.rows)


def _path_losses(sim_config, embed_spec, predictor, epsilon, path_seed):
    cfg_cls = type(sim_config)
    cfg = cfg_cls(
        model=sim_config.model,
        dt=sim_config.dt,
        dx=sim_config.dx,
        n_t=sim_config.n_t,
        n_x=sim_config.n_x,
        t0=sim_config.t0,
        x0=sim_config.x0,
        tail_tol=sim_config.tail_tol,
        rng_seed=path_seed,
        max_cells=sim_config.max_cells,
    )
    cube = simulate_stou(cfg)
    ts = build_training_set(cube, embed_spec)
    preds = ts.inputs @ predictor.weights + predictor.intercept
    return np.minimum(np.abs(preds - ts.outputs), epsilon)


def validate_exp_inequality(sim_config, embed_spec, epsilon, s_grid, n_paths,
                            k=1, predictor=None, base_seed=1000,
                            iid_shuffle=False, threads=1):
    """Simulate n_paths independent cubes and test both Laplace directions.

    The loss is the clipped absolute error of a fixed predictor on the
    embedded examples; the dependence coefficient entering the right-hand
    side comes from the generating model's decay profile, or is zero when
    iid_shuffle destroys the serial dependence.
    """
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be > 0")
    if n_paths < 2:
        raise InvalidParameterError("n_paths must be >= 2")
    if predictor is None:
        # unit weight-norm default keeps the dependence prefactor at 4
        n_feat = len(cone_offsets(embed_spec))
        predictor = LinearPredictor(
            intercept=0.0, weights=np.full(n_feat, 1.0 / n_feat))

    seeds = [base_seed + j for j in range(n_paths)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            losses = list(pool.map(
                lambda sd: _path_losses(sim_config, embed_spec, predictor,
                                        epsilon, sd),
                seeds,
            ))
    else:
        losses = [_path_losses(sim_config, embed_spec, predictor, epsilon, sd)
                  for sd in seeds]
    losses = np.array(losses)
    n_paths, m = losses.shape

    if iid_shuffle:
        flat = losses.ravel()
        perm = np.random.default_rng(base_seed).permutation(flat.size)
        losses = flat[perm].reshape(n_paths, m)
        theta_k = 0.0
    else:
        decay = theta_lex_stou(sim_config.model)
        gap = (k * embed_spec.spacing - embed_spec.past_frames) * embed_spec.dt
        theta_k = theta_loss(predictor.weights_l1,
                             len(cone_offsets(embed_spec)),
                             decay.evaluate(gap), mode="linear")

    grand_mean = losses.mean()
    variance = float(losses.var(ddof=1))

    rows = []
    for s in np.asarray(s_grid, dtype=float):
        exponents = (s / m) * (losses - grand_mean).sum(axis=1)
        rhs = exp_inequality_rhs(s, m, k, variance, epsilon, theta_k)
        for side, sign in (("plus", 1.0), ("minus", -1.0)):
            values = np.exp(sign * exponents)
            lhs = float(values.mean())
            stderr = float(values.std(ddof=1) / math.sqrt(n_paths))
            rows.append({
                "side": side,
                "s": float(s),
                "lhs": lhs,
                "lhs_stderr": stderr,
                "rhs": float(rhs),
            })
    return ValidationReport(
        epsilon=epsilon,
        m=m,
        k=k,
        n_paths=n_paths,
        theta_k=theta_k,
        rows=rows,
    )
