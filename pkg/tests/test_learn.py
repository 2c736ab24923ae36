from __future__ import annotations

import math

import numpy as np
import pytest

from conecast import (
    InvalidParameterError,
    LinearPredictor,
    PredictorGrid,
    SamplingFailureError,
    TrainingSet,
    aver_rmae,
    empirical_risk,
    ensemble_forecast,
    erm,
    gibbs_draw,
    gibbs_draw_exact,
    gibbs_draws,
    gibbs_grid_weights,
    random_l1_grid,
    truncated_loss,
)

from oracle_helpers import gibbs_weights_plain, total_variation


def _ts(inputs, outputs):
    inputs = np.asarray(inputs, dtype=float)
    outputs = np.asarray(outputs, dtype=float)
    return TrainingSet(
        inputs=inputs, outputs=outputs,
        m=inputs.shape[0], a_pc=inputs.shape[1],
    )


def _intercept_grid(*intercepts):
    return PredictorGrid(members=tuple(
        LinearPredictor(intercept=b0, weights=np.zeros(1)) for b0 in intercepts
    ))


# training set on which intercept-only predictors have risk min(|b0|, eps)
_ZERO_TS = _ts(np.zeros((4, 1)), np.zeros(4))


def test_truncated_loss_below_and_above_the_clip() -> None:
    assert truncated_loss(1.0, 1.3, 0.5) == pytest.approx(0.3)
    assert truncated_loss(1.0, 9.0, 0.5) == 0.5
    assert truncated_loss(2.0, 2.0, 0.5) == 0.0


def test_truncated_loss_rejects_bad_epsilon() -> None:
    with pytest.raises(InvalidParameterError):
        truncated_loss(1.0, 1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        truncated_loss(1.0, 1.0, -1.0)


def test_empirical_risk_zero_on_perfect_fit() -> None:
    ts = _ts([[2.0], [3.0]], [1.0, 1.5])
    beta = LinearPredictor(intercept=0.0, weights=np.array([0.5]))
    assert empirical_risk(beta, ts, 1.0) == 0.0


def test_empirical_risk_single_example_by_hand() -> None:
    ts = _ts([[2.0]], [1.0])
    beta = LinearPredictor(intercept=0.1, weights=np.array([0.3]))
    assert empirical_risk(beta, ts, 0.5) == pytest.approx(0.3)
    assert empirical_risk(beta, ts, 0.2) == pytest.approx(0.2)


def test_empirical_risk_saturates_at_tiny_epsilon() -> None:
    ts = _ts([[1.0], [2.0], [3.0], [4.0]], [10.0, 10.0, 10.0, 10.0])
    beta = LinearPredictor(intercept=0.0, weights=np.array([0.0]))
    assert empirical_risk(beta, ts, 1e-12) == pytest.approx(1e-12, rel=1e-12)


def test_empirical_risk_range_and_monotone_in_epsilon() -> None:
    rng = np.random.default_rng(8)
    ts = _ts(rng.normal(size=(30, 3)), rng.normal(size=30))
    beta = LinearPredictor(intercept=0.2, weights=np.array([0.1, -0.3, 0.2]))
    prev = 0.0
    for eps in (0.01, 0.1, 0.5, 1.0, 5.0):
        r = empirical_risk(beta, ts, eps)
        # averaging fully clipped losses may overshoot eps by one ulp
        assert 0.0 <= r <= eps * (1.0 + 1e-12)
        assert r >= prev
        prev = r


def test_erm_recovers_the_generating_predictor() -> None:
    rng = np.random.default_rng(3)
    truth = LinearPredictor(intercept=0.2, weights=np.array([0.3, -0.1]))
    inputs = rng.normal(size=(50, 2))
    outputs = np.array([truth.predict(x) for x in inputs])
    grid = PredictorGrid(members=(
        LinearPredictor(intercept=-0.4, weights=np.array([0.1, 0.1])),
        truth,
        LinearPredictor(intercept=0.0, weights=np.array([0.5, 0.5])),
    ))
    assert erm(grid, _ts(inputs, outputs), 1.0) is truth


def test_erm_prefers_lower_risk_and_breaks_ties_first() -> None:
    ts = _ts(np.zeros((5, 1)), np.full(5, 0.0))
    lo = LinearPredictor(intercept=0.1, weights=np.zeros(1))
    hi = LinearPredictor(intercept=0.3, weights=np.zeros(1))
    assert erm(PredictorGrid(members=(hi, lo)), ts, 1.0) is lo
    twin_a = LinearPredictor(intercept=0.2, weights=np.zeros(1))
    twin_b = LinearPredictor(intercept=-0.2, weights=np.zeros(1))
    assert erm(PredictorGrid(members=(twin_a, twin_b)), ts, 1.0) is twin_a


def test_gibbs_grid_weights_match_plain_enumeration() -> None:
    grid = _intercept_grid(0.0, 0.5, -0.5)
    got = gibbs_grid_weights(grid, _ZERO_TS, 0.5)
    want = gibbs_weights_plain([0.0, 0.5, 0.5], 4)
    assert np.allclose(got, want, rtol=1e-14)
    # hand form: weights proportional to (1, e^-1, e^-1)
    z = 1.0 + 2.0 * math.exp(-1.0)
    assert got[0] == pytest.approx(1.0 / z, rel=1e-12)
    assert got[1] == pytest.approx(math.exp(-1.0) / z, rel=1e-12)


def test_gibbs_grid_weights_flatten_as_epsilon_vanishes() -> None:
    grid = _intercept_grid(0.0, 0.4, -0.3, 0.9, -0.8)
    got = gibbs_grid_weights(grid, _ZERO_TS, 1e-9)
    assert total_variation(got, np.full(5, 0.2)) < 1e-8


def test_gibbs_draw_exact_frequencies_match_weights() -> None:
    grid = _intercept_grid(0.0, 0.5, -0.5)
    weights = gibbs_grid_weights(grid, _ZERO_TS, 0.5)
    rng = np.random.default_rng(17)
    n = 10_000
    counts = {0.0: 0, 0.5: 0, -0.5: 0}
    for _ in range(n):
        counts[gibbs_draw_exact(grid, _ZERO_TS, 0.5, rng).intercept] += 1
    for b0, w in zip((0.0, 0.5, -0.5), weights):
        se = math.sqrt(w * (1.0 - w) / n)
        assert abs(counts[b0] / n - w) < 4.0 * se


def test_gibbs_rejection_sampler_matches_enumeration() -> None:
    """Acceptance-rejection draws against a grid reference agree with the
    exact enumeration distribution in total variation."""
    grid = _intercept_grid(0.0, 0.5, -0.5)
    weights = gibbs_grid_weights(grid, _ZERO_TS, 0.5)
    rng = np.random.default_rng(29)
    draws = gibbs_draws(_ZERO_TS, 0.5, grid, rng, 100_000, max_proposals=10**7)
    counts = {0.0: 0, 0.5: 0, -0.5: 0}
    for beta in draws:
        counts[beta.intercept] += 1
    freq = np.array([counts[b0] / len(draws) for b0 in (0.0, 0.5, -0.5)])
    assert total_variation(freq, weights) < 0.02


def test_gibbs_concentrates_on_dominant_predictor() -> None:
    # m = 100 makes the zero-risk member beat risk-eps members by e^-5
    ts = _ts(np.zeros((100, 1)), np.zeros(100))
    grid = _intercept_grid(0.0, 0.9, -0.9)
    rng = np.random.default_rng(5)
    draws = gibbs_draws(ts, 0.5, grid, rng, 10_000)
    share = sum(1 for b in draws if b.intercept == 0.0) / len(draws)
    assert share > 0.9


def test_gibbs_draw_returns_reference_member() -> None:
    rng = np.random.default_rng(11)
    grid = _intercept_grid(0.0, 0.5, -0.5)
    beta = gibbs_draw(_ZERO_TS, 0.5, grid, rng)
    assert beta.intercept in (0.0, 0.5, -0.5)


def test_gaussian_reference_is_deterministic_in_the_seed() -> None:
    a = gibbs_draws(_ZERO_TS, 0.5, "gaussian_std", np.random.default_rng(42), 5)
    b = gibbs_draws(_ZERO_TS, 0.5, "gaussian_std", np.random.default_rng(42), 5)
    for x, y in zip(a, b):
        assert x.intercept == y.intercept
        assert np.array_equal(x.weights, y.weights)


def test_gibbs_unknown_reference_raises() -> None:
    with pytest.raises(InvalidParameterError):
        gibbs_draw(_ZERO_TS, 0.5, "bogus", np.random.default_rng(1))


def test_gibbs_sampling_failure_reports_acceptance_rate() -> None:
    # every proposal has risk ~ eps = 20, so acceptance ~ e^-200
    ts = _ts(np.zeros((100, 1)), np.full(100, 1e6))
    with pytest.raises(SamplingFailureError) as exc:
        gibbs_draw(ts, 20.0, "gaussian_std", np.random.default_rng(2),
                   max_proposals=500)
    assert exc.value.acceptance_rate == 0.0


def test_ensemble_forecast_single_draw_collapses_quantiles() -> None:
    rng = np.random.default_rng(7)
    fc = ensemble_forecast(_ZERO_TS, np.array([0.3]), 1, 0.5, "gaussian_std", rng)
    assert fc.draws.shape == (1,)
    v = fc.draws[0]
    assert fc.q25 == fc.q50 == fc.q75 == fc.min == fc.max == v


def test_ensemble_forecast_quantiles_are_ordered() -> None:
    rng = np.random.default_rng(13)
    fc = ensemble_forecast(
        _ZERO_TS, np.array([0.3]), 400, 0.5, "gaussian_std", rng
    )
    assert fc.min <= fc.q25 <= fc.q50 <= fc.q75 <= fc.max
    assert fc.q25 == pytest.approx(np.quantile(fc.draws, 0.25))
    assert fc.q75 == pytest.approx(np.quantile(fc.draws, 0.75))


def test_ensemble_forecast_rejects_bad_inputs() -> None:
    rng = np.random.default_rng(1)
    with pytest.raises(InvalidParameterError):
        ensemble_forecast(_ZERO_TS, np.array([0.3, 0.4]), 4, 0.5,
                          "gaussian_std", rng)
    with pytest.raises(InvalidParameterError):
        ensemble_forecast(_ZERO_TS, np.array([0.3]), 0, 0.5,
                          "gaussian_std", rng)


def test_aver_rmae_reference_points() -> None:
    assert aver_rmae([2.0, -3.0], [2.0, -3.0]) == 0.0
    assert aver_rmae([1.0, -1.5], [2.0, -3.0]) == pytest.approx(0.5)
    assert aver_rmae([0.0], [2.0]) == pytest.approx(1.0)


def test_aver_rmae_rejects_degenerate_inputs() -> None:
    with pytest.raises(InvalidParameterError):
        aver_rmae([1.0], [0.0])
    with pytest.raises(InvalidParameterError):
        aver_rmae([1.0, 2.0], [1.0])
    with pytest.raises(InvalidParameterError):
        aver_rmae([], [])


def test_random_l1_grid_stays_in_the_unit_ball() -> None:
    grid = random_l1_grid(3, 200, np.random.default_rng(23))
    assert grid.size == 200
    for beta in grid.members:
        assert beta.l1_norm <= 1.0 + 1e-12
        assert beta.weights.shape == (3,)


def test_random_l1_grid_is_deterministic_in_the_seed() -> None:
    g1 = random_l1_grid(2, 5, np.random.default_rng(31))
    g2 = random_l1_grid(2, 5, np.random.default_rng(31))
    for a, b in zip(g1.members, g2.members):
        assert a.intercept == b.intercept
        assert np.array_equal(a.weights, b.weights)


def test_predictor_grid_validates_members() -> None:
    fat = LinearPredictor(intercept=0.9, weights=np.array([0.3]))
    with pytest.raises(InvalidParameterError):
        PredictorGrid(members=(fat,))
    with pytest.raises(InvalidParameterError):
        PredictorGrid(members=())


def test_linear_predictor_basics() -> None:
    beta = LinearPredictor(intercept=0.5, weights=np.array([-0.25, 0.1]))
    assert beta.predict(np.array([2.0, 1.0])) == pytest.approx(0.1)
    assert beta.l1_norm == pytest.approx(0.85)
    assert beta.weights_l1 == pytest.approx(0.35)
    with pytest.raises(InvalidParameterError):
        LinearPredictor(intercept=math.nan, weights=np.array([0.1]))
    with pytest.raises(InvalidParameterError):
        LinearPredictor(intercept=0.0, weights=np.array([math.inf]))
