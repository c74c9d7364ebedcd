import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import grid_max_sum_rate, grid_waterfill, normalized_prediction
from pzfsim.asymptotics import AsymptoticParams, solve_optimal_s
from pzfsim.config import NoiseSpec, PlacementMode, ScenarioConfig
from pzfsim.powerctl import (
    allocate,
    equal_power,
    frozen_radii,
    g_factor,
    inner_levels,
    mean_power_curve,
    optimize_mean_power,
    solve_for_mean_power,
    solve_level,
    sum_rate,
    waterfill_candidate,
)
from pzfsim.simulate import base_params, nulling_s, power_plan


def test_candidate_examples():
    np.testing.assert_array_equal(waterfill_candidate(2.0, [1.0, 1.0]), [1.0, 1.0])
    np.testing.assert_allclose(waterfill_candidate(2.0, [1.0, 1e-6]), [1.0, 0.0])
    assert not waterfill_candidate(0.5, [2.0, 1.0]).any()


def test_mean_power_curve_limits():
    gains = np.array([[1.0, 3.0], [0.5, 10.0]])
    assert mean_power_curve(0.0, gains, 1.0) == 0.0
    assert mean_power_curve(1e9, gains, 1.0) == pytest.approx(1.0)
    # identical distances: deterministic curve
    g, R, a, M, lvl = 40.0, 0.15, 3.0, 3, 0.2
    edge = np.full((5, M), g * R**-a)
    assert mean_power_curve(lvl, edge, 1.0) == pytest.approx(min(1.0, M * max(0.0, lvl - R**a / g)))


def test_solve_level_examples():
    assert solve_level(0.5, np.array([[1.0]]), 1.0) == pytest.approx(1.5, abs=1e-9)
    gains = np.full((100, 3), 1e6)
    lvl = solve_level(1.0, gains, 1.0)
    np.testing.assert_allclose(allocate(lvl, gains, 1.0).sum(axis=1), 1.0, rtol=1e-12)


@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.integers(0, 2**31))
def test_solve_level_monotone(a, b, seed):
    gains = np.random.default_rng(seed).lognormal(0, 1.5, size=(200, 3))
    lo, hi = sorted((a, b))
    assert solve_level(lo, gains, 1.0) <= solve_level(hi, gains, 1.0) + 1e-12
    assert mean_power_curve(solve_level(lo, gains, 1.0), gains, 1.0) == pytest.approx(lo, abs=1e-6)


def test_allocate_examples():
    np.testing.assert_array_equal(allocate(0.8, np.array([2.0, 4.0]), 5.0), waterfill_candidate(0.8, [2.0, 4.0]))
    np.testing.assert_allclose(allocate(1e6, np.array([1.0, 1.0]), 2.0), [1.0, 1.0])


@given(st.integers(2, 3), st.integers(0, 2**31))
def test_clipped_allocation_matches_grid_oracle(M, seed):
    gains = np.random.default_rng(seed).lognormal(0, 1.2, size=M)
    p = allocate(1e3, gains, 1.0)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    _, best = grid_max_sum_rate(gains, 1.0)
    assert sum_rate(p, gains) >= best - 1e-3 * abs(best)


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_inner_level_kkt(M, seed):
    gains = np.random.default_rng(seed).lognormal(0, 2.0, size=(20, M))
    gam = inner_levels(gains, 1.0)
    p = waterfill_candidate(gam[:, None], gains)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=1e-12)
    on = p > 0
    # active streams sit at the water level, inactive ones above it
    np.testing.assert_allclose((p + 1 / gains)[on], np.broadcast_to(gam[:, None], p.shape)[on], rtol=1e-12)
    assert np.all(1 / gains[~on] >= np.broadcast_to(gam[:, None], p.shape)[~on] - 1e-12)


def test_unclipped_rows_solve_priced_problem():
    gains = np.array([0.8, 2.5, 6.0])
    level = 0.5  # price 1/level on total power, well below the peak
    p = allocate(level, gains, 10.0)
    _, oracle = grid_waterfill(gains, 10.0, price=1 / level)
    got = np.log(1 + p * gains).sum() - p.sum() / level
    assert got >= oracle - 1e-9


def test_equal_power():
    p = equal_power(3, 1.0)
    np.testing.assert_allclose(p, 1 / 3)
    assert p.sum() == pytest.approx(1.0)


def test_g_factor_properties():
    p = AsymptoticParams(60, 3, 3.0, s=0.02, mu=0.0)
    assert g_factor(p, 10, 0.5) == pytest.approx(2 * g_factor(p, 10, 1.0))
    assert g_factor(p.replace(mu=1e12), 10, 1.0) < 1e-6


def test_g_factor_power_compare_reference():
    cfg = ScenarioConfig(bs_density=60, pathloss_exp=3.0, noise=NoiseSpec("fixed", edge_snr_db=25.0),
                         antennas=(10,))
    L = 10
    sigma2 = 0.15**-3 / 10**2.5
    s = nulling_s(cfg, L)
    # independent scalar evaluation
    oracle = L**1.5 * (1 - s * s * math.pi * 180) / (s**-1 * 2 * math.pi * 60 + sigma2 * L**0.5)
    assert g_factor(base_params(cfg, L), L, 1.0) == pytest.approx(oracle, rel=1e-12)
    assert g_factor(base_params(cfg, L), L, 1.0) == pytest.approx(
        L**1.5 * normalized_prediction(60, 3, 3.0, s, 1.0, sigma2 * L**0.5), rel=1e-12)


def _params():
    cfg = ScenarioConfig(bs_density=60, pathloss_exp=3.0, noise=NoiseSpec("fixed", edge_snr_db=25.0),
                         antennas=(10,))
    return base_params(cfg, 10)


def test_optimize_mean_power_is_argmax():
    p = _params()
    radii = frozen_radii(PlacementMode.UNIFORM_DISK, 0.15, 3, 4000, np.random.default_rng(3))
    best = optimize_mean_power(p, 10, radii)
    assert 0 < best.mean_power <= 1.0
    for x in (1.0, 0.5, 0.25, 0.9 * best.mean_power, min(1.0, 1.1 * best.mean_power)):
        assert best.rate >= solve_for_mean_power(p, 10, radii, x).rate - 1e-12
    gains = best.g * radii**-3.0
    assert mean_power_curve(best.level, gains, 1.0) == pytest.approx(best.mean_power, abs=1e-6)


def test_optimize_mean_power_cell_edge_matches_grid():
    p = _params()
    radii = frozen_radii(PlacementMode.CELL_EDGE, 0.15, 3, 1, np.random.default_rng(0))
    best = optimize_mean_power(p, 10, radii)
    grid = np.linspace(1e-4, 1.0, 20001)
    rates = [solve_for_mean_power(p, 10, radii, x).rate for x in grid]
    assert best.rate == pytest.approx(max(rates), rel=1e-4)
    assert best.rate >= max(rates) - 1e-12


def test_power_plan_waterfill_is_deterministic():
    cfg = ScenarioConfig(bs_density=60, pathloss_exp=3.0, noise=NoiseSpec("fixed", edge_snr_db=25.0),
                         antennas=(10,), allocation="waterfill", waterfill_samples=3000)
    a = power_plan(cfg, 10)
    from pzfsim.simulate import _plan

    _plan.cache_clear()
    b = power_plan(cfg, 10)
    assert a == b and 0 < a.mean_power <= 1
