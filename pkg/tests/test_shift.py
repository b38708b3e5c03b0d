import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shocklab.dynamics import Bump, FieldState, PerturbationSpec, perturbed_state
from shocklab.errors import ShiftWindowError
from shocklab.functionals import build_weight
from shocklab.model import GasModel
from shocklab.profiles import build_profile
from shocklab.shift import (TRACE_COLUMNS, centered_rate, contract, cumulative_trapezoid,
                            phi_eps, shift_rhs)


@pytest.fixture(scope="module")
def weight01(profile01):
    return build_weight(profile01, 0.1)


BUMP = PerturbationSpec((Bump("v", "gaussian", -10.0, 3.0, 0.05),))


@given(y=st.floats(-1.0, 1.0), eps=st.floats(0.01, 0.5))
def test_phi_eps_shape(y, eps):
    e2 = eps * eps
    assert phi_eps(-y, eps) == -phi_eps(y, eps)
    assert abs(phi_eps(y, eps)) <= 1 / e2 * (1 + 1e-15)
    assert phi_eps(y, eps) * y <= 0
    assert phi_eps(e2, eps) == pytest.approx(-1 / e2)


@given(y1=st.floats(-0.1, 0.1), y2=st.floats(-0.1, 0.1))
def test_phi_eps_nonincreasing(y1, y2):
    lo, hi = sorted((y1, y2))
    assert phi_eps(lo, 0.1) >= phi_eps(hi, 0.1)


def test_shift_restores_profile(profile01, weight01):
    state = FieldState.from_profile(profile01)
    x0, _ = shift_rhs(state, 0.0, profile01, weight01)
    right, _ = shift_rhs(state, 0.5, profile01, weight01)
    left, _ = shift_rhs(state, -0.5, profile01, weight01)
    assert x0 == 0.0
    assert right < 0 < left


def test_shift_window(profile01, weight01):
    with pytest.raises(ShiftWindowError):
        shift_rhs(FieldState.from_profile(profile01), 60.0, profile01, weight01)


@given(c=st.lists(st.floats(-2, 2), min_size=3, max_size=3),
       steps=st.lists(st.floats(0.05, 1.0), min_size=4, max_size=12))
def test_centered_rate_exact_on_quadratics(c, steps):
    t = np.concatenate(([0.0], np.cumsum(steps)))
    f = c[0] + c[1] * t + c[2] * t * t
    d = centered_rate(f, t)
    assert np.allclose(d[1:-1], c[1] + 2 * c[2] * t[1:-1], atol=1e-9)


def test_cumulative_trapezoid():
    t = np.linspace(0, 2, 21)
    assert cumulative_trapezoid(2 * t, t)[-1] == pytest.approx(4.0)


def test_zero_perturbation(profile01, weight01):
    res = contract(profile01, weight01, FieldState.from_profile(profile01), 3.0)
    assert res.verdict
    assert np.all(res.trace.X == 0.0) and np.all(res.trace.wre == 0.0)


def test_small_bump_contracts(profile01, weight01):
    res = contract(profile01, weight01, perturbed_state(profile01, BUMP), 5.0)
    d = res.details
    assert res.verdict and d["wre_monotone"] and d["combination_nonpositive"]
    assert d["wreT"] < d["wre0"]
    assert math.isfinite(d["f_ratio"])
    assert d["R_ok"]
    rows = res.trace.rows()
    assert len(rows[0]) == len(TRACE_COLUMNS)
    assert len(rows) == d["steps"] + 1


def test_identity_residual_converges(es01, weight01):
    out = []
    for N in (1001, 2001):
        p = build_profile(es01, GasModel(0.0), 200.0, N)
        res = contract(p, build_weight(p, 0.1), perturbed_state(p, BUMP), 5.0)
        out.append(res.details["max_identity_residual"])
    assert out[0] / out[1] >= 2.0


def test_snapshots(profile01, weight01):
    res = contract(profile01, weight01, perturbed_state(profile01, BUMP), 2.0,
                   snapshot_times=(0.0, 1.0, 2.0))
    assert sorted(res.details["snapshots"]) == [0.0, 1.0, 2.0]
