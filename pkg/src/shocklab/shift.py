"""Dynamical shift and the weighted contraction monitor.

The shift solves ``X' = Phi_eps(Y(U^X)) (2|J_bad| + 2|J_para| + 1)`` and is
advanced together with the PDE inside the same RK4 stages.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import FieldState, Solver, perturbed_state
from .errors import ShiftWindowError
from .functionals import (FunctionalContext, FunctionalReport, LedgerRow, Weight,
                          build_weight, estimate_ledger, main_functional, shift_arrays)
from .model import GasModel, solve_rankine_hugoniot
from .profiles import ShockProfile, build_profile


def phi_eps(y: float, eps: float) -> float:
    """Saturated linear law: ``-y/eps^4`` on ``|y| <= eps^2``, ``-+1/eps^2`` beyond."""
    e2 = eps * eps
    if y <= -e2:
        return 1.0 / e2
    if y >= e2:
        return -1.0 / e2
    return -y / (e2 * e2)


def _check_window(X: float, L: float) -> None:
    if abs(X) > L / 4:
        raise ShiftWindowError(f"|X| = {abs(X)!r} exceeds L/4 = {L / 4!r}")


def shift_rhs(state: FieldState, X: float, profile: ShockProfile, weight: Weight,
              delta3: float = 0.1, ctx: FunctionalContext | None = None) -> tuple[float, float]:
    """``(X', f)`` where ``f = 2|J_bad| + 2|J_para|`` is the bracket without the 1."""
    _check_window(X, profile.L)
    ctx = ctx or FunctionalContext(profile, weight)
    vs, hs = shift_arrays(state.v, state.h, X, profile.dx)
    Y, jb, jp = ctx.core(vs, hs)
    f = 2.0 * abs(jb) + 2.0 * abs(jp)
    return phi_eps(Y, profile.end_states.eps) * (f + 1.0), f


# {{{ trace

TRACE_COLUMNS = ("t", "X", "Xdot", "wre", "Gv_accum", "D_accum", "identity_residual",
                 "f_bound", "Y", "Jbad", "Jpara", "Jgood")


@dataclass
class ShiftTrace:
    times: np.ndarray
    X: np.ndarray
    X_dot: np.ndarray
    wre: np.ndarray
    gv_accum: np.ndarray
    d_accum: np.ndarray
    identity_residual: np.ndarray
    f_bound: np.ndarray
    reports: list[FunctionalReport] = field(repr=False, default_factory=list)

    def column(self, name: str) -> np.ndarray:
        direct = {"t": self.times, "X": self.X, "Xdot": self.X_dot, "wre": self.wre,
                  "Gv_accum": self.gv_accum, "D_accum": self.d_accum,
                  "identity_residual": self.identity_residual, "f_bound": self.f_bound}
        if name in direct:
            return direct[name]
        attr = {"Jbad": "J_bad", "Jpara": "J_para", "Jgood": "J_good"}.get(name, name)
        return np.array([getattr(r, attr) for r in self.reports])

    def rows(self):
        cols = [self.column(c) for c in TRACE_COLUMNS]
        return [[float(c[i]) for c in cols] for i in range(len(self.times))]


def cumulative_trapezoid(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def centered_rate(f: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Second-order derivative on a nonuniform time grid; one-sided at the ends."""
    d = np.empty_like(f)
    if len(f) < 2:
        d[:] = 0.0
        return d
    hm = t[1:-1] - t[:-2]
    hp = t[2:] - t[1:-1]
    d[1:-1] = (hm ** 2 * (f[2:] - f[1:-1]) + hp ** 2 * (f[1:-1] - f[:-2])) / (hm * hp * (hm + hp))
    d[0] = (f[1] - f[0]) / (t[1] - t[0])
    d[-1] = (f[-1] - f[-2]) / (t[-1] - t[-2])
    return d

# }}}


@dataclass
class ContractionResult:
    trace: ShiftTrace
    verdict: bool
    first_violation: float | None
    details: dict
    final_state: FieldState
    ledger: list[LedgerRow]


def _stiffness(ctx: FunctionalContext) -> float:
    """``dY/dX`` at the profile: ``int a ((v~')^2 / v~^2 + (h~')^2)``."""
    return float(ctx.qa @ (ctx.dvt ** 2 / ctx.vt ** 2 + ctx.dht ** 2))


def contract(profile: ShockProfile, weight: Weight, state: FieldState, T: float,
             delta3: float = 0.1, delta0: float = 0.05, cfl: float = 0.4,
             positivity_floor: float = 1e-6, well_balanced: bool = True,
             dt_max: float | None = None, snapshot_times=()) -> ContractionResult:
    """Co-integrate the PDE and the shift from ``state`` over ``[0, T]``.

    Besides the PDE stability bound, the step obeys ``dt <= eps^4 / (2 K b)``
    with ``K`` an estimate of ``|dY/dX|`` and ``b`` the shift bracket: near
    ``Y = 0`` the shift equation relaxes at rate ``K b / eps^4``, which for
    small ``eps`` is faster than anything in the PDE.
    """
    es = profile.end_states
    eps, lam = es.eps, weight.lam
    dx, L = profile.dx, profile.L
    solver = Solver(profile, cfl=cfl, positivity_floor=positivity_floor,
                    well_balanced=well_balanced)
    ctx = FunctionalContext(profile, weight)
    k_lin = _stiffness(ctx)

    def xdot(v, h, X):
        _check_window(X, L)
        vs, hs = shift_arrays(v, h, X, dx)
        Y, jb, jp = ctx.core(vs, hs)
        return phi_eps(Y, eps) * (2.0 * abs(jb) + 2.0 * abs(jp) + 1.0)

    v, h, X, t = state.v, state.h, 0.0, 0.0
    times, Xs, Xdots, reports = [], [], [], []
    snapshots = {}
    pending = sorted(float(s) for s in snapshot_times if 0 <= s <= T)

    def record(v, h, X, t):
        _check_window(X, L)
        vs, hs = shift_arrays(v, h, X, dx)
        rep = ctx.decompose(vs, hs, delta3)
        bracket = 2.0 * abs(rep.J_bad) + 2.0 * abs(rep.J_para) + 1.0
        times.append(t)
        Xs.append(X)
        Xdots.append(phi_eps(rep.Y, eps) * bracket)
        reports.append(rep)
        return rep, bracket

    while True:
        rep, bracket = record(v, h, X, t)
        while pending and pending[0] <= t + 1e-12:
            snapshots[pending.pop(0)] = replace(state, v=v.copy(), h=h.copy(), t=t)
        if t >= T:
            break
        if abs(rep.Y) < eps ** 2:
            probe = 1e-3 * dx
            vs, hs = shift_arrays(v, h, X + probe, dx)
            k_num = abs(ctx.core(vs, hs)[0] - rep.Y) / probe
        else:
            k_num = 0.0
        k = max(k_lin, k_num)
        dt = min(solver.stable_dt(v), 0.5 * eps ** 4 / (k * bracket), T - t)
        if dt_max is not None:
            dt = min(dt, dt_max)
        if pending:
            dt = min(dt, pending[0] - t)
        if T - (t + dt) < 1e-12 * max(1.0, T):
            dt = T - t
        v, h, X, _, _ = solver.rk4(v, h, dt, t, extra=X, extra_rhs=xdot)
        t = T if t + dt >= T else t + dt

    times = np.array(times)
    wre = np.array([r.wre for r in reports])
    F = np.array([xd * r.Y + r.J_bad + r.J_para - r.J_good for xd, r in zip(Xdots, reports)])
    F_scale = np.array([abs(xd * r.Y) + abs(r.J_bad) + abs(r.J_para) + abs(r.J_good)
                        for xd, r in zip(Xdots, reports)])
    gv = np.array([r.Gv for r in reports])
    dd = np.array([r.D for r in reports])
    f = np.array([2.0 * abs(r.J_bad) + 2.0 * abs(r.J_para) for r in reports])
    if len(times) > 1:
        residual = np.abs(centered_rate(wre, times) - F)
    else:
        residual = np.zeros(1)
    trace = ShiftTrace(times=times, X=np.array(Xs), X_dot=np.array(Xdots), wre=wre,
                       gv_accum=cumulative_trapezoid(gv, times),
                       d_accum=cumulative_trapezoid(dd, times),
                       identity_residual=residual, f_bound=f, reports=reports)
    details = _assess(trace, F, F_scale, eps, lam, delta0)
    details["snapshots"] = snapshots
    final = replace(state, v=v, h=h, t=t)
    ledger = estimate_ledger(reports, eps, lam, es.sigma)
    first = details["first_violation"]
    return ContractionResult(trace=trace, verdict=details["verdict"], first_violation=first,
                             details=details, final_state=final, ledger=ledger)


def _assess(trace: ShiftTrace, F, F_scale, eps, lam, delta0) -> dict:
    t, wre = trace.times, trace.wre
    res = trace.identity_residual
    grid_est = float(res[1:-1].max()) if res.size > 2 else 0.0
    # the local identity residual is the measured discretization error of
    # d(wre)/dt at each step; the slack is ten times it, step by step
    slack = 10.0 * np.maximum(res[:-1], res[1:]) if res.size > 1 else np.zeros(0)
    wre0 = float(wre[0])
    rounding = 1e-13 * max(wre0, 1e-300)
    dt = np.diff(t)
    inc = np.diff(wre)
    bad_mono = np.nonzero(inc > slack * dt + rounding)[0]
    raw_up = inc > rounding
    bad_F = np.nonzero(F > 1e-8 * F_scale)[0]

    first = math.inf
    if bad_mono.size:
        first = min(first, float(t[bad_mono[0] + 1]))
    if bad_F.size:
        first = min(first, float(t[bad_F[0]]))

    f_int = float(np.sum(0.5 * (trace.f_bound[1:] + trace.f_bound[:-1]) * dt)) if dt.size else 0.0
    denom = lam / (delta0 * eps) * wre0
    f_ratio = f_int / denom if denom > 0 else (0.0 if f_int == 0 else math.inf)

    # R(U) along the trajectory, where the shift keeps |Y| <= eps^2
    R_norm = []
    for r in trace.reports:
        if abs(r.Y) <= eps ** 2:
            R, scale = main_functional(r, eps, lam, delta0)
            R_norm.append(R / scale if scale > 0 else 0.0)
    R_max = max(R_norm) if R_norm else float("nan")

    el = eps / lam
    gained = el * trace.gv_accum + trace.d_accum
    loss = wre0 - wre
    with np.errstate(divide="ignore", invalid="ignore"):
        d0 = np.where(gained > 0, loss / gained, np.inf)
    delta0_emp = float(np.min(d0)) if d0.size else math.inf
    allowance = np.concatenate(([0.0], np.cumsum(slack * dt)))
    cont_ok = bool(np.all(wre + delta0 * gained <= wre0 + allowance + rounding))

    verdict = bool(bad_mono.size == 0 and bad_F.size == 0 and math.isfinite(f_ratio))
    return {
        "verdict": verdict,
        "first_violation": None if first == math.inf else first,
        "wre_monotone": bool(bad_mono.size == 0),
        "combination_nonpositive": bool(bad_F.size == 0),
        "max_slack": float(slack.max()) if slack.size else 0.0,
        "max_identity_residual": grid_est,
        "raw_increases": int(raw_up.sum()),
        "max_raw_increase": float(inc.max()) if inc.size else 0.0,
        "f_integral": f_int,
        "f_ratio": f_ratio,
        "R_max_normalized": R_max,
        "R_ok": bool(not R_norm or R_max <= 1e-8),
        "R_samples": len(R_norm),
        "cont_main3": cont_ok,
        "delta0_empirical": delta0_emp,
        "wre0": wre0,
        "wreT": float(wre[-1]),
        "X_T": float(trace.X[-1]),
        "steps": len(t) - 1,
    }


def run_contraction(config) -> ContractionResult:
    """Build everything a :class:`~shocklab.harness.config.RunConfig` describes and contract."""
    es = solve_rankine_hugoniot(config.shock.v_minus, config.shock.u_minus,
                                config.shock.eps, config.shock.family)
    model = GasModel(config.model.alpha)
    num = config.numerics
    profile = build_profile(es, model, num.L, num.N)
    weight = build_weight(profile, config.weight.lam)
    state = perturbed_state(profile, config.perturbation, num.positivity_floor)
    return contract(profile, weight, state, config.time.T,
                    delta3=config.functionals.delta3, delta0=config.functionals.delta0,
                    cfl=num.cfl, positivity_floor=num.positivity_floor,
                    well_balanced=num.well_balanced)
