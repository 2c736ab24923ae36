from __future__ import annotations

import math

import pytest

from conecast import GaussianSeed, SimConfig, StouModel, simulate_stou


@pytest.fixture(scope="session")
def slow_field_cube():
    """Unit-rate field on the fine grid used by the moment checks."""
    config = SimConfig(
        model=StouModel(
            mean_reversion=1.0, cone_speed=1.0,
            seed=GaussianSeed(mu=0.0, sigma=0.5),
        ),
        dt=0.05, dx=0.05, n_t=2000, n_x=201, tail_tol=1e-4, rng_seed=11,
    )
    return simulate_stou(config)


@pytest.fixture(scope="session")
def fast_field_cube():
    """Fast-reverting field (rate 4) for the estimator recovery checks."""
    config = SimConfig(
        model=StouModel(
            mean_reversion=4.0, cone_speed=1.0,
            seed=GaussianSeed(mu=0.0, sigma=0.5),
        ),
        dt=0.05, dx=0.05, n_t=2000, n_x=201, tail_tol=1e-4, rng_seed=11,
    )
    return simulate_stou(config)


def assert_close_rel(value: float, target: float, rel: float, label: str) -> None:
    assert math.isfinite(value), label
    assert abs(value - target) <= rel * abs(target), (
        f"{label}: {value} vs {target} (rel {abs(value - target) / abs(target):.4f})"
    )
