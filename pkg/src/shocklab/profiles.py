"""Viscous shock traveling waves.

The two first integrals of the traveling-wave system slave ``u`` and ``h``
to ``v``, which leaves a scalar autonomous ODE

    v' = v^{1+alpha} (chord(v) - p(v)) / (sigma nu)

whose right side vanishes at both end states.  It is integrated outward
from the midpoint anchor in both directions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, ProfileError
from .model import EndStates, Family, GasModel, pressure

#: the integration stops once |v - v_pm| drops below this fraction of the jump
#: (or of the end state, whichever is larger)
STOP_FRACTION = 1e-12


def chord(vt, es: EndStates):
    """Secant of ``p`` through the two end states."""
    slope = (es.p_plus - es.p_minus) / (es.v_plus - es.v_minus)
    return es.p_minus + slope * (np.asarray(vt, dtype=float) - es.v_minus)


def profile_rhs(vt, end_states: EndStates, model: GasModel, nu: float = 1.0):
    """Right side of the scalar profile ODE for a family-two shock."""
    es = end_states
    if es.family is not Family.two:
        raise DomainError("profile_rhs is defined for family-two shocks")
    lo, hi = es.v_minus, es.v_plus
    arr = np.asarray(vt, dtype=float)
    if np.any(arr < lo) or np.any(arr > hi):
        raise DomainError(f"vt outside [{lo!r}, {hi!r}]")
    out = arr ** (1.0 + model.alpha) * (chord(arr, es) - 1.0 / arr) / (es.sigma * nu)
    # the chord and the curve meet exactly at the end states
    out = np.where((arr == lo) | (arr == hi), 0.0, out)
    return float(out) if out.ndim == 0 else out


def _rhs_unchecked(vt, es: EndStates, alpha: float):
    return vt ** (1.0 + alpha) * (chord(vt, es) - 1.0 / vt) / es.sigma


@dataclass(frozen=True, eq=False)
class ShockProfile:
    grid: np.ndarray
    v_tilde: np.ndarray
    u_tilde: np.ndarray
    h_tilde: np.ndarray
    dv_tilde: np.ndarray
    end_states: EndStates
    model: GasModel
    nu: float = 1.0
    _dense: object = field(default=None, repr=False)

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def L(self) -> float:
        return float(self.grid[-1])

    @property
    def N(self) -> int:
        return len(self.grid)

    @property
    def p_tilde(self) -> np.ndarray:
        return 1.0 / self.v_tilde

    @property
    def dp_tilde(self) -> np.ndarray:
        """Exact derivative of ``p(v_tilde)`` along the profile."""
        return -self.dv_tilde / self.v_tilde ** 2

    @property
    def dh_tilde(self) -> np.ndarray:
        """Exact derivative of ``h_tilde``: ``p(v_tilde)' / sigma``."""
        return self.dp_tilde / self.end_states.sigma

    def at(self, xi):
        """Evaluate ``(v, u, h, dv)`` off-grid using the integrator's dense output."""
        return self._dense(np.asarray(xi, dtype=float))


def _integrate_branch(es: EndStates, alpha: float, s_max: float, direction: int):
    """Integrate from the midpoint toward one end state; returns dense output and stop point."""
    mid = 0.5 * (es.v_minus + es.v_plus)
    target = es.v_plus if direction > 0 else es.v_minus
    # stop well above the integrator's noise floor near the end state
    gap = STOP_FRACTION * max(abs(es.v_plus - es.v_minus), abs(target))

    def rhs(_, y):
        vt = min(max(y[0], es.v_minus), es.v_plus)
        return [_rhs_unchecked(vt, es, alpha)]

    def reached(_, y):
        return abs(y[0] - target) - gap
    reached.terminal = True

    sol = solve_ivp(rhs, (0.0, direction * s_max), [mid], method="DOP853",
                    rtol=1e-13, atol=1e-15 * es.v_plus, dense_output=True,
                    events=reached)
    if sol.status < 0:
        raise ProfileError(f"profile integration failed: {sol.message}")
    return sol.sol, abs(sol.t[-1]), target


def build_profile(end_states: EndStates, model: GasModel | None = None,
                  L: float = 400.0, N: int = 8192, anchor_tol: float = 1e-10,
                  nu: float = 1.0) -> ShockProfile:
    """Sample the viscous shock on the uniform grid ``linspace(-L, L, N)``.

    A family-one profile is the mirror image of the family-two profile of
    the reflected end states.
    """
    model = model or GasModel()
    es = end_states
    if N < 2:
        raise DomainError("N must be at least 2")
    if not nu > 0:
        raise DomainError("nu must be positive")
    if es.eps * L / nu < 20:
        raise DomainError(
            f"domain too short: eps*L/nu = {es.eps * L / nu!r} < 20")

    if es.family is Family.one:
        mirror = build_profile(es.reflected(), model, L, N, anchor_tol, nu)
        dense = mirror._dense

        def dense_one(xi):
            v, u, h, dv = dense(-xi)
            return v, -u, -h, -dv
        return ShockProfile(grid=-mirror.grid[::-1], v_tilde=mirror.v_tilde[::-1].copy(),
                            u_tilde=-mirror.u_tilde[::-1], h_tilde=-mirror.h_tilde[::-1],
                            dv_tilde=-mirror.dv_tilde[::-1], end_states=es, model=model,
                            nu=nu, _dense=dense_one)

    alpha = model.alpha
    s_max = L / nu
    right, s_right, _ = _integrate_branch(es, alpha, s_max, +1)
    left, s_left, _ = _integrate_branch(es, alpha, s_max, -1)

    def v_of(xi):
        s = np.atleast_1d(np.asarray(xi, dtype=float)) / nu
        v = np.empty_like(s)
        pos = s >= 0
        sp = np.minimum(s[pos], s_right)
        sn = np.maximum(s[~pos], -s_left)
        v[pos] = right(sp)[0] if sp.size else v[pos]
        v[~pos] = left(sn)[0] if sn.size else v[~pos]
        v[s >= s_right] = es.v_plus
        v[s <= -s_left] = es.v_minus
        return np.clip(v, es.v_minus, es.v_plus)

    def dense(xi):
        scalar = np.ndim(xi) == 0
        v = v_of(xi)
        dv = _rhs_unchecked(v, es, alpha) / nu
        dv[(v == es.v_minus) | (v == es.v_plus)] = 0.0
        u = es.u_minus - es.sigma * (v - es.v_minus)
        h = es.u_minus + (1.0 / v - es.p_minus) / es.sigma
        if scalar:
            return float(v[0]), float(u[0]), float(h[0]), float(dv[0])
        return v, u, h, dv

    grid = np.linspace(-L, L, N)
    v, u, h, dv = dense(grid)

    mid = 0.5 * (es.v_minus + es.v_plus)
    if abs(dense(0.0)[0] - mid) > anchor_tol:
        raise ProfileError("anchor v(0) = midpoint not satisfied")
    if np.any(np.diff(v) < 0):
        raise ProfileError("profile is not monotone")
    return ShockProfile(grid=grid, v_tilde=v, u_tilde=u, h_tilde=h, dv_tilde=dv,
                        end_states=es, model=model, nu=nu, _dense=dense)


def _d1_fourth_order(f: np.ndarray, dx: float) -> np.ndarray:
    d = np.full_like(f, np.nan)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dx)
    return d


def shock_residual(profile: ShockProfile) -> dict:
    """Residuals of the traveling-wave equations on the grid.

    ``ode`` checks the integrated first equation
    ``nu v^beta p(v)' = sigma (v - v_-) + (h - u_-)`` with a fourth-order
    difference of the sampled ``v``; ``slaving`` checks both first integrals.
    """
    es, model = profile.end_states, profile.model
    v, h, u = profile.v_tilde, profile.h_tilde, profile.u_tilde
    dv_fd = _d1_fourth_order(v, profile.dx)
    lhs = -profile.nu * v ** model.beta * dv_fd / v ** 2
    rhs = es.sigma * (v - es.v_minus) + (h - es.u_minus)
    ode = np.nanmax(np.abs(lhs - rhs))
    slave_u = np.max(np.abs(u - (es.u_minus - es.sigma * (v - es.v_minus))))
    slave_h = np.max(np.abs(h - (es.u_minus + (pressure(v) - es.p_minus) / es.sigma)))
    # the momentum relation -sigma h' + p(v)' = 0 in integrated form
    momentum = np.max(np.abs(-es.sigma * (h - es.u_minus) + (pressure(v) - es.p_minus)))
    # u and h differ by the viscous correction
    cons = np.max(np.abs(h - (u - profile.nu * profile.dv_tilde / v ** (1 + model.alpha))))
    return {"ode": float(ode), "slaving": float(max(slave_u, slave_h)),
            "momentum": float(momentum), "effective_velocity": float(cons)}


# {{{ tails

@dataclass(frozen=True)
class TailReport:
    sup_dv: float
    decay_rate_left: float
    decay_rate_right: float
    inf_dv_core: float
    ratio_vh_max: float
    sigma_gap: float


def _fit_rate(xi: np.ndarray, dv: np.ndarray) -> float:
    slope, _ = np.polyfit(np.abs(xi), np.log(dv), 1)
    return float(-slope)


def verify_tails(profile: ShockProfile) -> TailReport:
    """Measured versions of the small-shock structure bounds.

    Decay rates are least-squares slopes of ``log v'`` against ``|xi|`` over
    the exponential tail, i.e. where ``v'`` lies between ``1e-9`` and
    ``1e-2`` of its peak (the padded constant region is excluded).
    """
    es = profile.end_states
    if es.family is not Family.two:
        profile = _mirror(profile)
        es = profile.end_states
    xi, dv = profile.grid, profile.dv_tilde
    if np.any(np.diff(profile.v_tilde) < 0) or np.any(dv < 0):
        raise ProfileError("profile is not monotone")
    sup = float(dv.max())
    tail = (dv > 1e-9 * sup) & (dv < 1e-2 * sup)
    left = tail & (xi < 0)
    right = tail & (xi > 0)
    if left.sum() < 3 or right.sum() < 3:
        raise ProfileError("not enough tail samples to fit decay rates")
    core = np.abs(xi) <= profile.nu / es.eps
    dh = profile.dh_tilde
    return TailReport(
        sup_dv=sup,
        decay_rate_left=_fit_rate(xi[left], dv[left]),
        decay_rate_right=_fit_rate(xi[right], dv[right]),
        inf_dv_core=float(dv[core].min()),
        ratio_vh_max=float(np.max(np.abs(es.sigma_star * dv + dh))),
        sigma_gap=abs(es.sigma - es.sigma_star),
    )


def _mirror(profile: ShockProfile) -> ShockProfile:
    return ShockProfile(grid=-profile.grid[::-1], v_tilde=profile.v_tilde[::-1],
                        u_tilde=-profile.u_tilde[::-1], h_tilde=-profile.h_tilde[::-1],
                        dv_tilde=-profile.dv_tilde[::-1],
                        end_states=profile.end_states.reflected(), model=profile.model,
                        nu=profile.nu)

# }}}
