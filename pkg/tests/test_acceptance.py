"""End-to-end acceptance gate.

One test per shipped claim, each printing a single PASS/FAIL line (visible
with -s) and asserting the stated tolerance. Tolerances are part of the
contract: loosening them here is never the right fix for a regression.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from conecast import (
    EmbeddingSpec,
    GaussianSeed,
    LinearPredictor,
    NigSeed,
    PredictorGrid,
    SimConfig,
    StouModel,
    ThetaDecay,
    TrainingSet,
    admissible_s_grid,
    bound_typeI_erm,
    bound_typeII_erm,
    estimate_parameters,
    gibbs_draws,
    select_a_t,
    simulate_stou,
    stou_variance,
    validate_exp_inequality,
)
from conecast.cli import forecast_pipeline

from oracle_helpers import pooled_autocorr


def _report(number: int, description: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" [{detail}]" if detail else ""
    print(f"ACCEPTANCE {number:02d}: {description} ... {status}{suffix}")
    assert ok, f"criterion {number}: {description}{suffix}"


# ---------------------------------------------------------------------------
# shared fixtures


def _pipeline_config(rule: str, past_frames: int, epsilon: float) -> dict:
    return {
        "model": {"mean_reversion": 4.0, "cone_speed": 1.0,
                  "seed": {"kind": "gaussian", "mu": 0.0, "sigma": 0.5}},
        "simulate": {"dt": 0.05, "dx": 0.05, "n_t": 2001, "n_x": 201,
                     "tail_tol": 1e-4, "rng_seed": 21},
        "embed": {"rule": rule, "past_frames": past_frames,
                  "epsilon": epsilon},
        "learn": {"ensemble_size": 50, "rng_seed": 5},
    }


@pytest.fixture(scope="module")
def pipeline_cache():
    """Forecast pipeline runs shared between the end-to-end criteria."""
    cache: dict = {}

    def run(rule: str, past_frames: int = 1, epsilon: float = 1.0):
        key = (rule, past_frames, epsilon)
        if key not in cache:
            cache[key] = forecast_pipeline(
                _pipeline_config(rule, past_frames, epsilon)
            )
        return cache[key]

    return run


def _common_pixel_iqr(result: dict, lo: int = 15, hi: int = 185) -> float:
    vals = [r["q75"] - r["q25"] for r in result["rows"]
            if lo <= r["pixel"] <= hi]
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# criteria


def test_criterion_01_spacing_tables_match_reference() -> None:
    """Selected spacings on the four estimated decay rates sit within +-2
    (and example counts within +-1) of the reference tables."""
    rates = (1.9715, 0.4196, 2.0461, 0.4884)
    targets = {
        "typeI": {"a": (124, 346, 121, 313), "m": (16, 6, 17, 7)},
        "typeII": {"a": (47, 156, 45, 139), "m": (41, 13, 43, 15)},
    }
    ok = True
    details = []
    for rule, want in targets.items():
        for rate, a_want, m_want in zip(rates, want["a"], want["m"]):
            decay = ThetaDecay(kind="exponential", prefactor=1.0, rate=rate)
            a = select_a_t(rule, decay, 0.05, 1, 1999)
            m = 1999 // a
            if abs(a - a_want) > 2 or abs(m - m_want) > 1:
                ok = False
                details.append(f"{rule}@{rate}: a={a}/{a_want} m={m}/{m_want}")
    _report(1, "spacing tables within +-2 / +-1 of reference", ok,
            "; ".join(details))


def test_criterion_02_worked_selections_exact() -> None:
    """Unit-step selection examples reproduce the documented spacings."""
    exp = ThetaDecay(kind="exponential", prefactor=1.0, rate=0.5)
    pow_ = ThetaDecay(kind="power", prefactor=1.0, rate=0.5)
    a1 = select_a_t("typeI", exp, 1.0, 1, 20000)
    a2 = select_a_t("theta_threshold", exp, 1.0, 1, 20000,
                    delta=0.05 / 3.0, grid_size=100)
    a3 = select_a_t("typeI", pow_, 1.0, 1, 20000)
    a4 = select_a_t("typeII", pow_, 1.0, 1, 20000)
    got = (a1, a2, 20000 // a2, a3, a4, 20000 // a4)
    want = (91, 34, 588, 8742, 1170, 17)
    _report(2, "worked spacing selections reproduce exactly", got == want,
            f"got {got} want {want}")


def test_criterion_03_fixed_time_bound_table() -> None:
    """Fixed-time bound values agree with the printed table entries to the
    last printed digit."""
    delta = 0.05 / 3.0
    cases = (
        (1.0, 588, math.exp(-16.5), 0.213, 1e-3),
        (1.0, 217, math.exp(-45.5), 0.283, 1e-3),
        (1.0, 2, 8741.0 ** -0.5, 18.97, 1e-2),
        (1.0, 17, 1169.0 ** -0.5, 27.51, 1e-2),
        (1000.0, 17, 1169.0 ** -0.5, 838.84, 1e-2),
    )
    ok = True
    details = []
    for epsilon, m, theta, printed, unit in cases:
        value = bound_typeII_erm(epsilon, delta, m, 100, theta).value
        if abs(value - printed) > unit:
            ok = False
            details.append(f"{value:.6f} vs {printed}")
    _report(3, "fixed-time bound table matches to printed precision", ok,
            "; ".join(details))


def test_criterion_04_sqrt_rate_bound_levels() -> None:
    """Square-root-rate bound stays positive and below the documented
    ceilings for the comfortable and minimal sample sizes."""
    big = bound_typeI_erm(1.0, 0.025, 217, 100).value
    small = bound_typeI_erm(1.0, 0.025, 2, 100).value
    ok = 0.0 < big <= 0.98 and 0.0 < small <= 9.40
    _report(4, "sqrt-rate bound within documented ceilings", ok,
            f"m=217: {big:.5f} <= 0.98; m=2: {small:.5f} <= 9.40")


def test_criterion_05_parameter_recovery_across_seeds() -> None:
    """Variogram estimation recovers the generating parameters on fresh
    cubes: reversion within 10%, cone speed within 5%, decay within 10%."""
    model = StouModel(mean_reversion=4.0, cone_speed=1.0,
                      seed=GaussianSeed(mu=0.0, sigma=0.5))
    ok = True
    details = []
    for seed in (11, 20, 33):
        cube = simulate_stou(SimConfig(
            model=model, dt=0.05, dx=0.05, n_t=2000, n_x=201,
            tail_tol=1e-4, rng_seed=seed,
        ))
        rep = estimate_parameters(cube)
        good = (abs(rep.mean_reversion_hat - 4.0) <= 0.4
                and abs(rep.cone_speed_hat - 1.0) <= 0.05
                and abs(rep.decay_rate_hat - 2.0) <= 0.2)
        ok = ok and good
        details.append(f"seed {seed}: A*={rep.mean_reversion_hat:.3f} "
                       f"c*={rep.cone_speed_hat:.3f}")
    _report(5, "parameter recovery within 10%/5%/10% on three seeds", ok,
            "; ".join(details))


def test_criterion_06_simulated_law_matches_model() -> None:
    """Replicated cubes match the stationary variance within 10% and the
    lag-0.25 autocorrelation within a 95% confidence interval, for both the
    Gaussian and the heavy-tailed driver."""
    ok = True
    details = []
    n_reps = 12
    acf_target = math.exp(-0.25)
    for label, seed_obj in (
        ("gaussian", GaussianSeed(mu=0.0, sigma=0.5)),
        ("nig", NigSeed(alpha=5.0, beta=0.0, mu=0.0, delta=0.2)),
    ):
        model = StouModel(mean_reversion=1.0, cone_speed=1.0, seed=seed_obj)
        var_target = stou_variance(model)
        variances, acfs = [], []
        for r in range(n_reps):
            cube = simulate_stou(SimConfig(
                model=model, dt=0.05, dx=0.05, n_t=500, n_x=101,
                tail_tol=1e-4, rng_seed=300 + r,
            ))
            variances.append(float(np.mean(cube.values ** 2)))
            acfs.append(pooled_autocorr(cube.values, 5, "time"))
        v_mean = float(np.mean(variances))
        a_mean = float(np.mean(acfs))
        halfwidth = (stats.t.ppf(0.975, n_reps - 1)
                     * float(np.std(acfs, ddof=1)) / math.sqrt(n_reps))
        var_ok = abs(v_mean - var_target) <= 0.10 * var_target
        acf_ok = abs(a_mean - acf_target) <= halfwidth
        ok = ok and var_ok and acf_ok
        details.append(f"{label}: var {v_mean:.4f}/{var_target:.4f} "
                       f"acf {a_mean:.4f}+-{halfwidth:.4f}")
    _report(6, "simulated variance within 10% and acf within 95% CI", ok,
            "; ".join(details))


def test_criterion_07_gibbs_sampler_distribution() -> None:
    """Acceptance-rejection draws match the enumerated target distribution
    within 0.02 total variation at 100k draws."""
    ts = TrainingSet(inputs=np.zeros((4, 1)), outputs=np.zeros(4), m=4, a_pc=1)
    intercepts = (0.0, 0.5, -0.5)
    grid = PredictorGrid(members=tuple(
        LinearPredictor(intercept=b0, weights=np.zeros(1))
        for b0 in intercepts
    ))
    # independent target: risks are min(|b0|, eps) on the all-zero data
    risks = np.array([min(abs(b0), 0.5) for b0 in intercepts])
    weights = np.exp(-math.sqrt(4.0) * risks)
    weights /= weights.sum()
    draws = gibbs_draws(ts, 0.5, grid, np.random.default_rng(101), 100_000,
                        max_proposals=10**7)
    counts = {b0: 0 for b0 in intercepts}
    for beta in draws:
        counts[beta.intercept] += 1
    freq = np.array([counts[b0] / len(draws) for b0 in intercepts])
    tv = 0.5 * float(np.abs(freq - weights).sum())
    _report(7, "randomized-draw distribution within 0.02 total variation",
            tv < 0.02, f"tv={tv:.4f}")


def test_criterion_08_laplace_inequality_holds() -> None:
    """The Laplace-transform inequality holds within 3 Monte-Carlo stderr in
    both directions, at block sizes 1 and 2, on 300 fresh cubes."""
    cfg = SimConfig(
        model=StouModel(mean_reversion=1.0, cone_speed=1.0,
                        seed=GaussianSeed(mu=0.0, sigma=0.5)),
        dt=0.05, dx=0.05, n_t=200, n_x=11, tail_tol=1e-3, rng_seed=1,
    )
    spec = EmbeddingSpec(spacing=5, past_frames=1, cone_speed=1.0,
                         dt=0.05, dx=0.05, pixel=5)
    m = (cfg.n_t - 1) // spec.spacing
    ok = True
    details = []
    for k in (1, 2):
        s_grid = admissible_s_grid(m, k, 1.0, n_points=6)
        rep = validate_exp_inequality(cfg, spec, 1.0, s_grid, 300, k=k,
                                      base_seed=900, threads=2)
        ok = ok and rep.holds(3.0)
        details.append(f"k={k}: worst {rep.max_violation_sigma:.1e} sigma")
    _report(8, "concentration inequality holds at 3 stderr for k in {1,2}",
            ok, "; ".join(details))


def test_criterion_09_forecast_quality_by_rule(pipeline_cache) -> None:
    """End-to-end forecasts: the direct rule picks spacing ~47 and the block
    rule ~124; both cover at least 70% of held-out truths and the tighter
    spacing yields strictly narrower bands."""
    direct = pipeline_cache("typeII")
    block = pipeline_cache("typeI")
    ok = (abs(direct["spacing"] - 47) <= 2
          and abs(block["spacing"] - 124) <= 2
          and direct["coverage_iqr"] >= 0.70
          and block["coverage_iqr"] >= 0.70
          and direct["mean_iqr"] < block["mean_iqr"])
    _report(9, "pipeline spacing, coverage, and band-width ordering", ok,
            f"spacings {direct['spacing']}/{block['spacing']}, coverage "
            f"{direct['coverage_iqr']:.3f}/{block['coverage_iqr']:.3f}, "
            f"iqr {direct['mean_iqr']:.4f} < {block['mean_iqr']:.4f}")


def test_criterion_10_band_width_monotonicity(pipeline_cache) -> None:
    """Band widths respond monotonically to the knobs: non-decreasing in the
    cone depth (on shared pixels) and non-increasing in the accuracy level."""
    depth_iqrs = [
        _common_pixel_iqr(pipeline_cache("typeII", past_frames=p))
        for p in (1, 8, 15)
    ]
    eps_iqrs = [pipeline_cache("typeII", epsilon=e)["mean_iqr"]
                for e in (1.0, 2.0, 2.99)]
    depth_ok = all(a <= b + 1e-12 for a, b in zip(depth_iqrs, depth_iqrs[1:]))
    eps_ok = all(a + 1e-12 >= b for a, b in zip(eps_iqrs, eps_iqrs[1:]))
    _report(10, "band width monotone in cone depth and accuracy level",
            depth_ok and eps_ok,
            f"depth {['%.4f' % v for v in depth_iqrs]}, "
            f"eps {['%.4f' % v for v in eps_iqrs]}")
