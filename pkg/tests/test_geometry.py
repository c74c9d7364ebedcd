import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pzfsim.config import ConfigError, PlacementMode
from pzfsim.geometry import (
    TorusWindow,
    build_realization,
    place_mobiles,
    sample_hppp,
    torus_distance,
    with_nulling_radius,
)
from pzfsim.seeding import rng_for


def test_torus_distance_wraps():
    w = TorusWindow(10.0)
    assert torus_distance(np.array([1.0, 1.0]), np.array([9.0, 1.0]), w) == pytest.approx(2.0)
    assert torus_distance(np.array([3.0, 4.0]), np.array([3.0, 4.0]), w) == 0.0
    assert torus_distance(np.array([0.0, 0.0]), np.array([5.0, 5.0]), w) == pytest.approx(math.sqrt(50))


coord = st.floats(0, 10, allow_nan=False, exclude_max=True)


@given(coord, coord, coord, coord)
def test_torus_distance_is_min_over_images(px, py, qx, qy):
    w = TorusWindow(10.0)
    p, q = np.array([px, py]), np.array([qx, qy])
    images = [np.hypot(qx + 10 * a - px, qy + 10 * b - py) for a in (-1, 0, 1) for b in (-1, 0, 1)]
    d = torus_distance(p, q, w)
    assert d == pytest.approx(min(images), abs=1e-12)
    assert d == pytest.approx(torus_distance(q, p, w), abs=1e-12)
    assert d <= 10 / math.sqrt(2) + 1e-12


def test_hppp_count_is_poisson():
    w = TorusWindow(2.0)
    counts = np.array([len(sample_hppp(30.0, w, rng_for(7, 0, t))) for t in range(10_000)])
    assert abs(counts.mean() - 120) <= 3 * math.sqrt(120 / counts.size)
    assert counts.var() == pytest.approx(120, rel=0.05)


def test_hppp_empty_and_deterministic():
    w = TorusWindow(2.0)
    assert sample_hppp(0.0, w, rng_for(1)).shape == (0, 2)
    np.testing.assert_array_equal(sample_hppp(30.0, w, rng_for(3, 9)), sample_hppp(30.0, w, rng_for(3, 9)))


def test_cell_edge_mobiles_at_radius(rng):
    w = TorusWindow(5.0)
    bs = np.array([0.05, 4.95])  # near a corner so wrapping matters
    pts = place_mobiles(bs, PlacementMode.CELL_EDGE, 0.15, 3, rng, w)
    np.testing.assert_allclose(torus_distance(bs, pts, w), 0.15, rtol=1e-12)


def test_uniform_disk_mean_distance(rng):
    pts = place_mobiles(np.zeros(2), PlacementMode.UNIFORM_DISK, 1.0, 100_000, rng)
    assert np.hypot(pts[:, 0], pts[:, 1]).mean() == pytest.approx(2 / 3, rel=0.01)


def test_degenerate_disk(rng):
    bs = np.array([1.0, 1.0])
    pts = place_mobiles(bs, PlacementMode.UNIFORM_DISK, 1e-9, 1, rng)
    assert np.abs(pts - bs).max() <= 1e-9


def test_total_mobile_count_mean():
    w = TorusWindow(5.774)
    area = w.side**2
    n = np.array([build_realization(30.0, 3, 0.15, "uniform_disk", w, 0.0, rng_for(5, t)).n_mobiles
                  for t in range(50)])
    expect = 30 * area * 3
    # count = 3 x Poisson(30 area): sd of the mean is 3 sqrt(30 area / n)
    assert abs(n.mean() - expect) <= 3 * 3 * math.sqrt(30 * area / n.size)


def test_nulled_sets_zero_radius_and_inclusion():
    w = TorusWindow(3.0)
    net = build_realization(30.0, 3, 0.15, "uniform_disk", w, 0.0, rng_for(11))
    assert all(len(s) == 0 for s in net.nulled_sets)
    net2 = with_nulling_radius(net, 0.3)
    for k in range(net2.n_bs):
        assert set(net2.served_set(k)) <= set(net2.nulled_sets[k])
        inside = np.flatnonzero(net2.dist[:, k] < 0.3)
        np.testing.assert_array_equal(net2.nulled_sets[k], inside)


def test_serving_distance_matches_radius_for_cell_edge():
    w = TorusWindow(2.0)
    net = build_realization(30.0, 3, 0.15, PlacementMode.CELL_EDGE, w, 0.2, rng_for(2))
    np.testing.assert_allclose(net.serving_distance(), 0.15, rtol=1e-9)


def test_nulling_radius_beyond_half_window_rejected():
    with pytest.raises(ConfigError):
        build_realization(30.0, 3, 0.15, "uniform_disk", TorusWindow(1.0), 0.6, rng_for(0))
