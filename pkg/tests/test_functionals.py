import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shocklab.dynamics import Bump, FieldState, PerturbationSpec, perturbed_state
from shocklab.errors import DomainError, ShiftWindowError
from shocklab.functionals import (LEDGER_FAMILIES, FunctionalContext, TruncationKind,
                                  TruncationMode, bd_rel_E, build_weight, centered_diff,
                                  decompose, estimate_ledger, eta_rel, integrate,
                                  jacobian_check, main_functional, normalized_vars,
                                  shift_arrays, shifted_field, trapezoid_weights, truncate)
from shocklab.model import GasModel, solve_rankine_hugoniot
from shocklab.profiles import build_profile


@pytest.fixture(scope="module")
def weight01(profile01):
    return build_weight(profile01, 0.1)


@pytest.fixture(scope="module")
def ctx01(profile01, weight01):
    return FunctionalContext(profile01, weight01)


bump = st.tuples(st.sampled_from(["v", "h"]), st.sampled_from(["gaussian", "sine-packet"]),
                 st.floats(-40, 40), st.floats(1.0, 8.0), st.floats(-0.3, 0.3))


def _state(profile, bumps):
    spec = PerturbationSpec(tuple(Bump(*b) for b in bumps))
    return perturbed_state(profile, spec)


# {{{ quadrature

@given(a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_trapezoid_exact_on_lines(a, b):
    x = np.linspace(-1.0, 3.0, 41)
    assert integrate(a * x + b, x) == pytest.approx(4 * a + 4 * b, abs=1e-12)
    q = trapezoid_weights(41, 0.1)
    assert q @ (a * x + b) == pytest.approx(4 * a + 4 * b, abs=1e-12)


@given(c=st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_centered_diff_exact_on_quadratics(c):
    x = np.linspace(0.0, 2.0, 21)
    f = c[0] + c[1] * x + c[2] * x * x
    assert np.allclose(centered_diff(f, 0.1), c[1] + 2 * c[2] * x, atol=1e-11)

# }}}


def test_relative_entropy_vanishes_on_diagonal(profile01):
    p = profile01
    dens, total = eta_rel(p.v_tilde, p.u_tilde, p.v_tilde, p.u_tilde, p.grid)
    assert total == 0.0 and np.all(dens == 0.0)
    assert bd_rel_E(p.v_tilde, p.u_tilde, p.dv_tilde, p.v_tilde, p.u_tilde, p.dv_tilde,
                    p.grid) == 0.0


def test_weight(profile01, weight01, es01):
    a, ap = weight01.a, weight01.a_prime
    assert a[0] == pytest.approx(1.0, abs=1e-9)
    assert a[-1] == pytest.approx(1.1, abs=1e-9)
    assert np.all(np.diff(a) >= 0) and np.all(ap >= 0)
    mid = 0.5 * (es01.v_minus + es01.v_plus)
    i = np.argmin(np.abs(profile01.grid))
    assert a[i] == pytest.approx(1 - (0.1 / es01.eps) * (1 / mid - es01.p_minus), abs=1e-12)
    with pytest.raises(DomainError):
        build_weight(profile01, 1.5)


def test_weight_rejects_family_one(es01):
    es1 = solve_rankine_hugoniot(es01.v_plus, es01.u_plus, es01.eps, family="one")
    with pytest.raises(DomainError):
        build_weight(build_profile(es1, GasModel(0.0), 200.0, 401), 0.1)


# {{{ shift

@given(X=st.floats(-3.0, 3.0), c=st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_shift_exact_on_cubics(X, c):
    x = np.linspace(-5.0, 5.0, 101)
    f = c[0] + c[1] * x + c[2] * x ** 2 + c[3] * x ** 3
    g, _ = shift_arrays(f, f, X, 0.1)
    xs = x + X
    inner = (xs > x[0] + 0.2) & (xs < x[-1] - 0.2)
    exact = c[0] + c[1] * xs + c[2] * xs ** 2 + c[3] * xs ** 3
    assert np.allclose(g[inner], exact[inner], atol=1e-9)


def test_integer_shift_is_index_shift():
    f = np.arange(10.0) ** 2
    g, _ = shift_arrays(f, f, 0.3, 0.1)
    assert np.allclose(g[:-3], f[3:], atol=1e-12)
    assert np.all(g[-3:] == f[-1])


def test_shift_window(profile01):
    state = FieldState.from_profile(profile01)
    with pytest.raises(ShiftWindowError):
        shifted_field(state, 60.0)

# }}}


@given(k=st.floats(0.01, 0.5), amp=st.floats(-0.2, 0.5))
def test_truncation(profile01, k, amp):
    v = profile01.v_tilde * (1 + amp * np.exp(-0.01 * profile01.grid ** 2))
    pt = 1 / profile01.v_tilde
    for kind in TruncationKind:
        vbar = truncate(v, profile01, TruncationMode(kind, k))
        d = 1 / vbar - pt
        if kind is not TruncationKind.upper_only:
            assert np.all(d >= -k - 1e-12)
        if kind is not TruncationKind.lower_only:
            assert np.all(d <= k + 1e-12)
    assert np.array_equal(truncate(profile01.v_tilde, profile01,
                                   TruncationMode(TruncationKind.two_sided, k)), profile01.v_tilde)


# {{{ exact identities

@given(bumps=st.lists(bump, min_size=1, max_size=3), delta3=st.floats(0.01, 0.3))
def test_decomposition_identities(profile01, weight01, ctx01, bumps, delta3):
    state = _state(profile01, bumps)
    r = decompose(state, profile01, weight01, delta3)
    parts = r.Y_g + r.Y_b + r.Y_l + r.Y_s
    scale = abs(r.Y_g) + abs(r.Y_b) + abs(r.Y_l) + abs(r.Y_s) + 1e-300
    assert abs(r.Y - parts) <= 1e-10 * scale
    lhs = r.J_bad - r.J_good
    rhs = r.bad - r.good
    scale = abs(r.J_bad) + abs(r.J_good) + abs(r.bad) + abs(r.good) + 1e-300
    assert abs(lhs - rhs) <= 1e-10 * scale
    assert r.J_para == pytest.approx(r.B3 + r.B4 + r.B5, rel=1e-12, abs=1e-300)
    Y, Jbad, Jpara = ctx01.core(state.v, state.h)
    assert (Y, Jbad, Jpara) == pytest.approx((r.Y, r.J_bad, r.J_para), rel=1e-12, abs=1e-18)
    assert r.wre >= 0 and r.Gv >= 0 and r.D >= 0 and r.Gh_plus >= 0 and r.Gh_minus >= 0


def test_decomposition_of_profile_is_zero(profile01, weight01):
    r = decompose(FieldState.from_profile(profile01), profile01, weight01, 0.1)
    assert all(x == 0.0 for x in r.as_row() if x != r.delta3)
    R, scale = main_functional(r, 0.1, 0.1, 0.05)
    assert R == 0.0 and scale == 0.0

# }}}


def test_jacobian_identity_second_order(profile01, profile01_fine):
    coarse = jacobian_check(profile01)["max_deviation"]
    fine = jacobian_check(profile01_fine)["max_deviation"]
    assert coarse / fine >= 3.0


def test_normalized_vars(profile01):
    y, w, W = normalized_vars(profile01.v_tilde, profile01, 0.1)
    assert y[0] == 0.0 and y[-1] == 1.0
    assert np.max(np.abs(W)) <= 1e-12


def test_ledger_on_profile(profile01, weight01):
    r = decompose(FieldState.from_profile(profile01), profile01, weight01, 0.1)
    rows = estimate_ledger([r], 0.1, 0.1, profile01.end_states.sigma)
    assert [row.family for row in rows] == list(LEDGER_FAMILIES)
    for row in rows:
        assert row.n_samples == 1
        assert row.ratio == 0.0 or math.isnan(row.ratio)
