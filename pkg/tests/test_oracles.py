import math

import numpy as np
import pytest

from oracles import grid_max_sum_rate, grid_waterfill, simplex_grid


def test_simplex_grid_covers_region():
    g = simplex_grid(3, 1.0, 10)
    assert len(g) == math.comb(13, 3)  # lattice points with sum <= 10 in 3 dims
    assert (g >= 0).all() and (g.sum(axis=1) <= 1 + 1e-12).all()


def test_grid_oracles_on_symmetric_case():
    p, _ = grid_max_sum_rate([2.0, 2.0], 1.0)
    np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-6)
    p, _ = grid_waterfill([1.0, 1.0], 10.0, price=0.5)  # unconstrained optimum p = 1/price - 1/g = 1
    np.testing.assert_allclose(p, [1.0, 1.0], atol=1e-4)
