import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import logistic_profile
from shocklab.errors import DomainError
from shocklab.model import GasModel, solve_rankine_hugoniot
from shocklab.profiles import build_profile, profile_rhs, shock_residual, verify_tails


def test_matches_closed_form(profile01, es01):
    exact = logistic_profile(es01, profile01.grid)
    assert np.max(np.abs(profile01.v_tilde - exact)) <= 1e-9


def test_midpoint_values(profile01, es01):
    i = np.argmin(np.abs(profile01.grid))
    assert profile01.grid[i] == 0.0
    jump = es01.v_plus - es01.v_minus
    v0 = 0.5 * (es01.v_plus + es01.v_minus)
    u0 = es01.u_minus - es01.sigma * (v0 - es01.v_minus)
    dv0 = es01.sigma * jump ** 2 / 4           # peak slope of the logistic profile
    h0 = u0 - dv0 / v0
    assert profile01.v_tilde[i] == pytest.approx(v0, abs=1e-12)
    assert profile01.u_tilde[i] == pytest.approx(u0, abs=1e-12)
    assert profile01.h_tilde[i] == pytest.approx(h0, abs=1e-10)
    # frozen values of the same quantities
    assert v0 == pytest.approx(1.0555556, abs=1e-7)
    assert u0 == pytest.approx(-0.0527046, abs=1e-7)
    assert h0 == pytest.approx(-0.0554786, abs=1e-7)


def test_residuals(profile01):
    res = shock_residual(profile01)
    assert res["ode"] <= 1e-8
    assert res["slaving"] <= 1e-10
    assert res["momentum"] <= 1e-10
    assert res["effective_velocity"] <= 1e-10


def test_monotone_and_bounded(profile01, es01):
    assert np.all(np.diff(profile01.v_tilde) >= 0)
    assert profile01.v_tilde[0] == pytest.approx(es01.v_minus, abs=1e-10)
    assert profile01.v_tilde[-1] == pytest.approx(es01.v_plus, abs=1e-10)


def test_viscosity_rescaling(es01, profile01):
    half = build_profile(es01, GasModel(0.0), 100.0, 2001, nu=0.5)
    v, _, _, _ = profile01.at(half.grid / 0.5)
    assert np.max(np.abs(half.v_tilde - v)) <= 1e-9


def test_family_one_is_mirror(es01):
    es1 = solve_rankine_hugoniot(es01.v_plus, es01.u_plus, es01.eps, family="one")
    p1 = build_profile(es1, GasModel(0.0), 200.0, 2001)
    assert np.all(np.diff(p1.v_tilde) <= 0)
    assert shock_residual(p1)["ode"] <= 1e-8


def test_domain_too_short(es01):
    with pytest.raises(DomainError, match="domain too short"):
        build_profile(es01, GasModel(0.0), 50.0, 501)


def test_rhs_domain(es01):
    m = GasModel(0.0)
    assert profile_rhs(es01.v_minus, es01, m) == 0.0
    assert profile_rhs(es01.v_plus, es01, m) == 0.0
    with pytest.raises(DomainError):
        profile_rhs(es01.v_plus + 0.01, es01, m)


@given(s=st.floats(0.001, 0.999), alpha=st.floats(0.0, 1.0))
def test_rhs_positive_inside(es01, s, alpha):
    v = es01.v_minus + s * (es01.v_plus - es01.v_minus)
    assert profile_rhs(v, es01, GasModel(alpha)) > 0


def test_tail_rates(profile01, es01):
    tails = verify_tails(profile01)
    rate = es01.sigma * (es01.v_plus - es01.v_minus)
    assert tails.decay_rate_left == pytest.approx(rate, rel=0.02)
    assert tails.decay_rate_right == pytest.approx(rate, rel=0.02)
    assert tails.sup_dv == pytest.approx(rate * (es01.v_plus - es01.v_minus) / 4, rel=1e-6)
    assert tails.inf_dv_core > 0
