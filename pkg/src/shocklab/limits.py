"""Vanishing-viscosity sweeps by exact rescaling.

If ``(v, u)`` solves the problem with viscosity ``nu`` on ``[0, T]`` then
``(v, u)(nu s, nu y)`` solves the ``nu = 1`` problem on ``[0, T/nu]``.
Every member of a sweep is therefore run at ``nu = 1`` on a dilated domain,
and the shift is mapped back with ``X_nu(t) = nu X(t / nu)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import Bump, FieldState, PerturbationSpec, Solver, evolve
from .errors import DomainError, ShockLabError, VacuumProximityError
from .functionals import build_weight, centered_diff, integrate
from .model import EndStates, GasModel, phi
from .profiles import ShockProfile, build_profile
from .shift import contract

#: total width of the mollifier, in units of nu
MOLLIFIER_WIDTH = 8.0


def mollifier(half_width: float, dx: float) -> np.ndarray:
    """Normalized samples of the smooth bump ``exp(-1 / (1 - s^2))``."""
    m = int(math.floor(half_width / dx))
    if m < 1:
        return np.ones(1)
    s = np.arange(-m, m + 1) * dx / half_width
    k = np.zeros_like(s)
    inside = np.abs(s) < 1
    k[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return k / k.sum()


def mollify(f: np.ndarray, half_width: float, dx: float) -> np.ndarray:
    k = mollifier(half_width, dx)
    if k.size == 1:
        return f.copy()
    if k.size >= f.size:
        raise DomainError("mollifier wider than the domain")
    return np.convolve(f, k, mode="same")


@dataclass(frozen=True)
class InitialReport:
    E0: float          # relative entropy of the Euler data against the Riemann shock
    bd: float          # the effective-velocity functional of the nu-level data
    gap: float


def prepare_initial(nu: float, end_states: EndStates, perturbation: PerturbationSpec,
                    profile: ShockProfile, floor: float = 1e-6):
    """Well-prepared data for viscosity ``nu``.

    The Euler data are the Riemann shock plus ``perturbation`` (bumps on
    ``v`` and on ``u``; a bump targeting ``h`` is read as a velocity bump).
    The perturbation is mollified at width ``8 nu`` and superposed on the
    viscous profile, so zero perturbation returns the profile itself.
    """
    if abs(profile.nu - nu) > 1e-14 * nu:
        raise DomainError("profile viscosity does not match nu")
    grid, dx = profile.grid, profile.dx
    half = 0.5 * MOLLIFIER_WIDTH * nu
    if half >= 0.25 * profile.L:
        raise DomainError("mollification width exceeds the domain margin")
    perturbation.check_support(profile.L)
    dv0, du0 = perturbation.fields(grid)

    v_bar = np.where(grid < 0, end_states.v_minus, end_states.v_plus)
    v0 = v_bar + dv0
    if not np.min(v0) > floor:
        raise VacuumProximityError("Euler data reach the positivity floor", 0.0)
    E0 = integrate(phi(v0 / v_bar) + 0.5 * du0 ** 2, grid)

    state = FieldState.from_profile(profile)
    if perturbation.is_zero:
        return state, InitialReport(E0=E0, bd=0.0, gap=abs(E0))

    alpha = profile.model.alpha
    mv = mollify(dv0, half, dx)
    mu = mollify(du0, half, dx)
    vt = profile.v_tilde
    v = vt + mv
    if not np.min(v) > floor:
        raise VacuumProximityError("mollified data reach the positivity floor", 0.0)
    dv = profile.dv_tilde + centered_diff(mv, dx)
    h = profile.h_tilde + mu - nu * (dv / v ** (1 + alpha) - profile.dv_tilde / vt ** (1 + alpha))
    bd = integrate(phi(v / vt) + 0.5 * (h - profile.h_tilde) ** 2, grid)
    return replace(state, v=v, h=h), InitialReport(E0=E0, bd=bd, gap=abs(bd - E0))


def dilate(perturbation: PerturbationSpec, nu: float) -> PerturbationSpec:
    """The same bumps seen in the rescaled variable ``y = x / nu``."""
    return PerturbationSpec(tuple(replace(b, center=b.center / nu, width=b.width / nu)
                                  for b in perturbation.bumps))


# {{{ sweep

@dataclass(frozen=True)
class SweepConfig:
    end_states: EndStates
    model: GasModel
    perturbation: PerturbationSpec     # in Euler variables, physical units
    nu_list: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    T: float = 10.0
    L: float = 200.0                   # physical half-width of the domain
    dx: float = 0.5                    # grid spacing in rescaled units
    lam: float = 0.1
    delta3: float = 0.1
    delta0: float = 0.05
    cfl: float = 0.4
    positivity_floor: float = 1e-6

    def __post_init__(self):
        nus = list(self.nu_list)
        if not nus or any(b >= a for a, b in zip(nus, nus[1:])):
            raise DomainError("nu_list must be strictly decreasing")
        if nus[0] != 1.0:
            raise DomainError("nu_list must start at 1")

    def grid_for(self, nu: float) -> tuple[float, int]:
        """Rescaled half-width and point count: ``L / nu`` at fixed spacing."""
        Ly = self.L / nu
        return Ly, int(round(2 * Ly / self.dx)) + 1


@dataclass
class NuRun:
    nu: float
    initial: InitialReport
    t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    X_nu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    triple: tuple[float, float, float] = (math.nan, math.nan, math.nan)
    drift_ratio: float = math.nan
    verdict: bool | None = None
    error: str | None = None
    accumulators: dict = field(default_factory=dict)


@dataclass
class SweepReport:
    runs: list[NuRun]
    l1_gaps: list[float]
    drift_constant: float
    triple_constant: float
    sigma: float

    @property
    def gaps_decreasing(self) -> bool:
        g = self.l1_gaps
        return len(g) >= 1 and all(b < a for a, b in zip(g, g[1:]))

    @property
    def ok(self) -> bool:
        return all(r.error is None for r in self.runs)


def _run_member(cfg: SweepConfig, nu: float) -> NuRun:
    es = cfg.end_states
    Ly, N = cfg.grid_for(nu)
    profile = build_profile(es, cfg.model, Ly, N)
    weight = build_weight(profile, cfg.lam)
    state, init = prepare_initial(1.0, es, dilate(cfg.perturbation, nu), profile,
                                  cfg.positivity_floor)
    # E0 and the nu-level functional transform back with the factor nu
    init = InitialReport(E0=nu * init.E0, bd=nu * init.bd, gap=nu * init.gap)
    run = NuRun(nu=nu, initial=init)
    res = contract(profile, weight, state, cfg.T / nu, delta3=cfg.delta3,
                   delta0=cfg.delta0, cfl=cfg.cfl, positivity_floor=cfg.positivity_floor)
    tr = res.trace
    s = tr.times
    run.t = nu * s
    run.X_nu = nu * tr.X
    eta = np.array([r.eta for r in tr.reports])
    vphi = np.array([r.vphi for r in tr.reports])
    diss = np.array([r.diss for r in tr.reports])
    acc_phi = nu * _cumtrapz(vphi, s)
    acc_diss = nu * _cumtrapz(diss, s)
    run.accumulators = {"eta": nu * eta, "vphi": acc_phi, "diss": acc_diss}
    run.triple = (float(np.max(nu * eta)), float(acc_phi[-1]), float(acc_diss[-1]))
    scale = math.sqrt(init.E0) + init.E0
    drift = float(np.max(np.abs(run.X_nu))) * es.jump_v
    run.drift_ratio = drift / scale if scale > 0 else (0.0 if drift == 0 else math.inf)
    run.verdict = res.verdict
    return run


def _cumtrapz(y, t):
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def l1_gap(t1, x1, t2, x2, T: float, n: int = 4001) -> float:
    grid = np.linspace(0.0, T, n)
    d = np.abs(np.interp(grid, t1, x1) - np.interp(grid, t2, x2))
    return integrate(d, grid)


def run_sweep(cfg: SweepConfig, runner=None) -> SweepReport:
    """One contraction run per ``nu``; failures are annotated, not raised.

    ``runner`` may be an executor-like ``map`` for running members in
    parallel; results are reduced in ``nu_list`` order either way.
    """
    def member(nu):
        try:
            return _run_member(cfg, nu)
        except ShockLabError as exc:
            return NuRun(nu=nu, initial=InitialReport(math.nan, math.nan, math.nan),
                         error=f"{type(exc).__name__}: {exc}")

    mapper = runner or map
    runs = list(mapper(member, cfg.nu_list))
    gaps = []
    for a, b in zip(runs, runs[1:]):
        if a.error or b.error:
            gaps.append(math.nan)
        else:
            gaps.append(l1_gap(a.t, a.X_nu, b.t, b.X_nu, cfg.T))
    good = [r for r in runs if r.error is None]
    drift_c = max((r.drift_ratio for r in good), default=math.nan)
    E0 = max((r.initial.E0 for r in good), default=math.nan)
    if good and E0 > 0:
        triple_c = max(max(r.triple) / r.initial.E0 for r in good)
    else:
        triple_c = 0.0 if good else math.nan
    return SweepReport(runs=runs, l1_gaps=gaps, drift_constant=drift_c,
                       triple_constant=triple_c, sigma=cfg.end_states.sigma)


def static_shift(report: SweepReport, run: NuRun) -> np.ndarray:
    """Shift in the original (static) frame: ``sigma t + X_nu(t)``."""
    return report.sigma * run.t + run.X_nu

# }}}


# {{{ rescaling check

def _solve_fields(es, model, perturbation, nu, L, dx, T, cfl, floor, rescaled):
    """Fields at time ``T`` (physical) on physical positions for one discretization."""
    if rescaled:
        Ly = L / nu
        N = int(round(2 * Ly / dx)) + 1
        profile = build_profile(es, model, Ly, N)
        state, _ = prepare_initial(1.0, es, dilate(perturbation, nu), profile, floor)
        horizon = T / nu
        to_physical = nu
    else:
        N = int(round(2 * L / dx)) + 1
        profile = build_profile(es, model, L, N, nu=nu)
        state, _ = prepare_initial(nu, es, perturbation, profile, floor)
        horizon = T
        to_physical = 1.0
    solver = Solver(profile, cfl=cfl, positivity_floor=floor)
    final = evolve(solver, state, horizon).snapshots[-1]
    return to_physical * profile.grid, final.v, final.h


def rescaling_check(es: EndStates, model: GasModel, perturbation: PerturbationSpec,
                    nu: float = 0.5, L: float = 200.0, dx: float = 0.5, T: float = 5.0,
                    cfl: float = 0.4, floor: float = 1e-6) -> dict:
    """Compare a direct solve at viscosity ``nu`` with the rescaled ``nu = 1`` solve.

    The direct solve uses physical spacing ``dx``.  Two rescaled solves use
    spacing ``dx / nu`` (the same physical resolution, so the discrete
    systems coincide up to rounding) and ``dx`` (``1/nu`` times finer).  The
    grid tolerance is the difference between the two rescaled solves.
    """
    x_d, v_d, _ = _solve_fields(es, model, perturbation, nu, L, dx, T, cfl, floor, False)
    x_s, v_s, _ = _solve_fields(es, model, perturbation, nu, L, dx / nu, T, cfl, floor, True)
    x_f, v_f, _ = _solve_fields(es, model, perturbation, nu, L, dx, T, cfl, floor, True)
    window = np.abs(x_d) <= 0.5 * L
    xs = x_d[window]
    fine = np.interp(xs, x_f, v_f)
    same = np.interp(xs, x_s, v_s)
    return {"agreement": float(np.max(np.abs(v_d[window] - fine))),
            "same_resolution": float(np.max(np.abs(v_d[window] - same))),
            "grid_tolerance": float(np.max(np.abs(same - fine)))}

# }}}
