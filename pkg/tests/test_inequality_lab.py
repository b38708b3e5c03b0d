from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shocklab.errors import DomainError
from shocklab.inequality_lab import (PoincareSample, check_local_expansions, check_phi_bounds,
                                     fourier_basis, poincare_R, poincare_gradient,
                                     poincare_search)
from shocklab.model import phi


def R(W, delta, C1=np.inf):
    return poincare_R(PoincareSample(np.asarray(W, dtype=float), delta, C1))


def test_zero_function():
    assert R(np.zeros(33), 0.3) == 0.0


@pytest.mark.parametrize("n", [257, 1025, 4097])
def test_spot_values(n):
    y = np.linspace(0, 1, n)
    assert R(np.ones(n), 0.1) == pytest.approx(-90 + 1.1 + 2 / 3 + 0.1, abs=1e-10)
    assert R(y - 0.5, 0.1) == pytest.approx(-10 / 144 + 1.1 / 12 + 0.1 / 32 - 0.9 / 6, abs=1e-5)
    # the constant W = -2 sits on the sphere int W^2 = 4
    assert R(np.full(n, -2.0), 0.01, 4.0) == pytest.approx(-4 / 3 + 12 * 0.01, abs=1e-12)


def test_shape_and_ball():
    with pytest.raises(ValueError):
        PoincareSample(np.zeros(2), 0.1)
    with pytest.raises(DomainError):
        PoincareSample(np.full(11, 3.0), 0.1, 4.0)


def test_second_order_quadrature():
    exact = -10 / 144 + 1.1 / 12 + 0.1 / 32 - 0.9 / 6
    errs = [abs(R(np.linspace(0, 1, n) - 0.5, 0.1) - exact) for n in (65, 129, 257)]
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5


@given(seed=st.integers(0, 2 ** 31), delta=st.floats(0.01, 0.5))
def test_gradient_matches_directional_derivative(seed, delta):
    rng = np.random.default_rng(seed)
    W = 0.5 * rng.standard_normal(65)
    E = rng.standard_normal(65)
    h = 1e-6
    fd = (R(W + h * E, delta) - R(W - h * E, delta)) / (2 * h)
    an = poincare_gradient(W, delta) @ E
    assert fd == pytest.approx(an, rel=1e-5, abs=1e-6)


def test_search_determinism_and_chunking():
    a = poincare_search(0.01, 4.0, 800, seed=5, n_grid=129, n_refine=3, ascent_steps=20)
    b = poincare_search(0.01, 4.0, 800, seed=5, n_grid=129, n_refine=3, ascent_steps=20)
    with ThreadPoolExecutor(4) as ex:
        c = poincare_search(0.01, 4.0, 800, seed=5, n_grid=129, n_refine=3, ascent_steps=20,
                            runner=ex.map)
    assert a.max_R == b.max_R == c.max_R
    assert a.sampled_max == b.sampled_max == c.sampled_max
    assert np.array_equal(a.argmax_W, c.argmax_W)


def test_search_small():
    s = poincare_search(0.01, 4.0, 1000, seed=1, n_grid=257, n_refine=5, ascent_steps=50)
    assert s.max_R <= 1e-9
    q = np.full(257, 1 / 256)
    q[0] = q[-1] = 0.5 / 256
    assert q @ s.argmax_W ** 2 <= 4.0 * (1 + 1e-12)


def test_search_finds_positive_values_above_boundary():
    # the constant -2 already gives a positive value once delta > 1/9
    s = poincare_search(0.2, 4.0, 2000, seed=1, n_grid=257, n_refine=5, ascent_steps=50)
    assert s.max_R > 0


def test_fourier_basis_shape():
    B = fourier_basis(65)
    assert B.shape == (65, 33)
    assert np.all(B[:, 0] == 1.0)


def test_phi_bounds():
    rep = check_phi_bounds(1.0, 20_000, seed=3)
    assert rep.sim_violations == 0
    assert 0 < rep.c1 <= rep.c1_high
    assert rep.c2 > 0 and all(c > 0 for c in rep.c3.values())
    assert phi(1.0) == 0.0


def test_local_expansions_split():
    rep = check_local_expansions(1.0, (0.01, 0.1), 50_000, seed=2)
    for row in rep.rows:
        assert row.est1_lower_violations == 0
        # the quadratic upper bound only fails where v < w
        assert row.est1_upper_violations_expansion == 0
        assert row.est1_upper_violations == row.est1_upper_violations_compression
        assert row.p_est1_C > 0 and row.v_quad_C > 0 and row.p_quad_C > 0
    assert rep.largest_delta("est1_lower_violations") == 0.1


def test_upper_bound_counterexample():
    # Phi(0.9) exceeds (0.9 - 1)^2 / 2
    assert phi(0.9) > 0.5 * 0.01
