"""Method-of-lines solver for the isothermal Navier-Stokes system in the
moving frame ``xi = x - sigma t``, written in ``(v, h)`` with
``h = u - nu v_xi / v^{1+alpha}``:

    v_t - sigma v_xi - h_xi = nu (v^{-(1+alpha)} v_xi)_xi
    h_t - sigma h_xi + p(v)_xi = 0

Hyperbolic fluxes use a Rusanov (local Lax-Friedrichs) flux on a MUSCL
reconstruction with the van Leer limiter, the diffusion a centered
three-point stencil with face-averaged diffusivity, time stepping is RK4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericalBlowupError, VacuumProximityError
from .model import GasModel
from .profiles import ShockProfile

RUNAWAY = 1e8


# {{{ data

@dataclass(frozen=True, eq=False)
class FieldState:
    grid: np.ndarray
    v: np.ndarray
    h: np.ndarray
    t: float
    model: GasModel
    nu: float = 1.0

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def u(self) -> np.ndarray:
        """Velocity recovered from the effective velocity."""
        dv = np.gradient(self.v, self.dx, edge_order=2)
        return self.h + self.nu * dv / self.v ** (1.0 + self.model.alpha)

    @classmethod
    def from_profile(cls, profile: ShockProfile, t: float = 0.0) -> "FieldState":
        return cls(profile.grid, profile.v_tilde.copy(), profile.h_tilde.copy(), t,
                   profile.model, profile.nu)


@dataclass(frozen=True)
class Bump:
    target: str          # "v" or "h"
    shape: str           # "gaussian" or "sine-packet"
    center: float
    width: float
    amplitude: float

    #: a gaussian drops below 1e-12 of its peak this many widths away
    REACH = math.sqrt(2.0 * math.log(1e12))

    def __post_init__(self):
        if self.target not in ("v", "h"):
            raise DomainError(f"bump target must be v or h, got {self.target!r}")
        if self.shape not in ("gaussian", "sine-packet"):
            raise DomainError(f"unknown bump shape {self.shape!r}")
        if not self.width > 0:
            raise DomainError("bump width must be positive")

    def __call__(self, xi):
        s = (np.asarray(xi, dtype=float) - self.center) / self.width
        g = self.amplitude * np.exp(-0.5 * s * s)
        if self.shape == "sine-packet":
            g = g * np.sin(2.0 * np.pi * s)
        return g

    def support(self) -> tuple[float, float]:
        r = self.REACH * self.width
        return self.center - r, self.center + r


@dataclass(frozen=True)
class PerturbationSpec:
    bumps: tuple[Bump, ...] = ()

    def check_support(self, L: float) -> None:
        for b in self.bumps:
            lo, hi = b.support()
            if lo < -L / 2 or hi > L / 2:
                raise DomainError(
                    f"bump at {b.center!r} (width {b.width!r}) is not supported in [-L/2, L/2]")

    def fields(self, xi) -> tuple[np.ndarray, np.ndarray]:
        xi = np.asarray(xi, dtype=float)
        dv = np.zeros_like(xi)
        dh = np.zeros_like(xi)
        for b in self.bumps:
            if b.target == "v":
                dv = dv + b(xi)
            else:
                dh = dh + b(xi)
        return dv, dh

    @property
    def is_zero(self) -> bool:
        return all(b.amplitude == 0 for b in self.bumps)


@dataclass(frozen=True)
class MonitorRecord:
    t: float
    min_v: float
    max_v: float
    entropy_residual: float
    mass_defect: float
    boundary_leak: float


@dataclass
class Trajectory:
    snapshots: list[FieldState] = field(default_factory=list)
    monitors: list[MonitorRecord] = field(default_factory=list)

# }}}


def van_leer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = a * b
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(ab > 0, 2.0 * ab / (a + b), 0.0)
    return s


class Solver:
    """Semi-discrete operator and RK4 stepping around a fixed profile.

    With ``well_balanced`` the discrete residual of the sampled profile is
    subtracted from the right side, so the profile is an exact steady state
    of the discrete system rather than one up to truncation error.
    """

    def __init__(self, profile: ShockProfile, cfl: float = 0.4,
                 positivity_floor: float = 1e-6, well_balanced: bool = True):
        self.profile = profile
        self.es = profile.end_states
        self.sigma = self.es.sigma
        self.alpha = profile.model.alpha
        self.nu = profile.nu
        self.dx = profile.dx
        self.cfl = cfl
        self.floor = positivity_floor
        self.well_balanced = well_balanced
        self._balance = None
        if well_balanced:
            dv, dh, flux = self._operator(profile.v_tilde, profile.h_tilde)
            self._balance = (dv, dh, flux)
        quarter = profile.grid[-1] - 0.25 * (profile.grid[-1] - profile.grid[0])
        self._edge = np.abs(profile.grid) >= quarter

    # {{{ spatial operator

    def _operator(self, v, h):
        sigma, dx, nu = self.sigma, self.dx, self.nu
        sv = np.zeros_like(v)
        sh = np.zeros_like(h)
        sv[1:-1] = van_leer(v[1:-1] - v[:-2], v[2:] - v[1:-1])
        sh[1:-1] = van_leer(h[1:-1] - h[:-2], h[2:] - h[1:-1])
        vl = v[:-1] + 0.5 * sv[:-1]
        vr = v[1:] - 0.5 * sv[1:]
        hl = h[:-1] + 0.5 * sh[:-1]
        hr = h[1:] - 0.5 * sh[1:]
        speed = abs(sigma) + np.maximum(1.0 / vl, 1.0 / vr)
        fv = 0.5 * ((-sigma * vl - hl) + (-sigma * vr - hr)) - 0.5 * speed * (vr - vl)
        fh = 0.5 * ((-sigma * hl + 1.0 / vl) + (-sigma * hr + 1.0 / vr)) - 0.5 * speed * (hr - hl)

        diff = v ** (-1.0 - self.alpha)
        gv = nu * 0.5 * (diff[:-1] + diff[1:]) * (v[1:] - v[:-1]) / dx
        total_v = fv - gv

        dv = np.zeros_like(v)
        dh = np.zeros_like(h)
        dv[1:-1] = -(total_v[1:] - total_v[:-1]) / dx
        dh[1:-1] = -(fh[1:] - fh[:-1]) / dx
        # net inflow through the two boundary faces, for conservation checks
        flux = np.array([total_v[0] - total_v[-1], fh[0] - fh[-1]])
        return dv, dh, flux

    def rhs(self, v, h, t: float | None = None):
        """Time derivatives of ``(v, h)`` and the net boundary inflow."""
        if not np.min(v) > self.floor:
            raise VacuumProximityError(
                f"v reached the positivity floor {self.floor!r}", t)
        dv, dh, flux = self._operator(v, h)
        if self._balance is not None:
            bv, bh, bf = self._balance
            dv = dv - bv
            dh = dh - bh
            flux = flux - bf
        return dv, dh, flux

    # }}}

    def stable_dt(self, v) -> float:
        vmin = float(np.min(v))
        s_max = abs(self.sigma) + 1.0 / vmin
        return self.cfl * min(self.dx / s_max,
                              self.dx ** 2 * vmin ** (1.0 + self.alpha) / (2.0 * self.nu))

    def rk4(self, v, h, dt: float, t: float = 0.0, extra: float | None = None,
            extra_rhs: Callable | None = None):
        """One RK4 step of ``(v, h)`` and optionally a scalar ODE coupled to it.

        ``extra_rhs(v, h, x, k1)`` returns the derivative of the scalar; it is
        evaluated at every stage with that stage's values. Returns the new
        state, the new scalar, the stage-one derivatives and the integrated
        boundary inflow.
        """
        def f(vs, hs, xs, ts):
            dv, dh, flux = self.rhs(vs, hs, ts)
            dx_ = extra_rhs(vs, hs, xs) if extra_rhs is not None else 0.0
            return dv, dh, dx_, flux

        x = 0.0 if extra is None else extra
        k1 = f(v, h, x, t)
        k2 = f(v + 0.5 * dt * k1[0], h + 0.5 * dt * k1[1], x + 0.5 * dt * k1[2], t + 0.5 * dt)
        k3 = f(v + 0.5 * dt * k2[0], h + 0.5 * dt * k2[1], x + 0.5 * dt * k2[2], t + 0.5 * dt)
        k4 = f(v + dt * k3[0], h + dt * k3[1], x + dt * k3[2], t + dt)
        w = dt / 6.0
        v_new = v + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        h_new = h + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        x_new = x + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        inflow = w * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        self._validate(v_new, h_new, t + dt)
        return v_new, h_new, (None if extra is None else x_new), k1, inflow

    def _validate(self, v, h, t):
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(h))):
            raise NumericalBlowupError("non-finite values", t)
        if np.max(np.abs(v)) > RUNAWAY or np.max(np.abs(h)) > RUNAWAY:
            raise NumericalBlowupError("runaway growth", t)
        if not np.min(v) > self.floor:
            raise VacuumProximityError(
                f"v reached the positivity floor {self.floor!r}", t)

    # {{{ monitors

    def entropy_residual(self, v, h, dv, dh) -> float:
        """Excess in the integrated entropy balance of ``eta = h^2/2 - log v``.

        Zero for the continuous problem; negative values are numerical
        dissipation.
        """
        dx, sigma, nu = self.dx, self.sigma, self.nu
        p = 1.0 / v
        production = np.sum(-p[1:-1] * dv[1:-1] + h[1:-1] * dh[1:-1]) * dx
        eta_l = 0.5 * h[0] ** 2 - math.log(v[0])
        eta_r = 0.5 * h[-1] ** 2 - math.log(v[-1])
        q_l = -sigma * eta_l + p[0] * h[0]
        q_r = -sigma * eta_r + p[-1] * h[-1]
        diff = v ** (-1.0 - self.alpha)
        dface = 0.5 * (diff[:-1] + diff[1:])
        dissipation = nu * np.sum(dface[1:-1] * (v[2:-1] - v[1:-2]) * (p[1:-2] - p[2:-1])) / dx
        return float(production + (q_r - q_l) + dissipation)

    def monitor(self, t, v, h, dv, dh, mass_change, inflow, dt) -> MonitorRecord:
        pv, ph = self.profile.v_tilde, self.profile.h_tilde
        dev = np.abs(v - pv) + np.abs(h - ph)
        defect = 0.0
        if dt > 0:
            defect = float(np.sum(np.abs(mass_change - inflow))) / dt
        return MonitorRecord(t=t, min_v=float(v.min()), max_v=float(v.max()),
                             entropy_residual=self.entropy_residual(v, h, dv, dh),
                             mass_defect=defect,
                             boundary_leak=float(dev[self._edge].max()))

    # }}}

    def mass(self, v, h) -> np.ndarray:
        """Interior sums of ``v`` and ``h`` (boundary nodes are pinned)."""
        return np.array([v[1:-1].sum(), h[1:-1].sum()]) * self.dx


def semidiscrete_rhs(state: FieldState, profile: ShockProfile, well_balanced: bool = False):
    """``(dv/dt, dh/dt)`` of the plain (or balanced) semi-discrete scheme."""
    if state.v.shape != profile.grid.shape:
        raise DomainError("state and profile grids differ")
    solver = Solver(profile, well_balanced=well_balanced)
    dv, dh, _ = solver.rhs(state.v, state.h, state.t)
    return dv, dh


def step(state: FieldState, dt: float, solver: Solver) -> FieldState:
    v, h, _, _, _ = solver.rk4(state.v, state.h, dt, state.t)
    return replace(state, v=v, h=h, t=state.t + dt)


def _time_marks(T: float, cadence: float | None) -> list[float]:
    if T <= 0:
        return []
    if not cadence or cadence <= 0 or cadence >= T:
        return [T]
    n = int(math.floor(T / cadence + 1e-9))
    marks = [k * cadence for k in range(1, n + 1)]
    if T - marks[-1] > 1e-9 * T:
        marks.append(T)
    else:
        marks[-1] = T
    return marks


def evolve(solver: Solver, state: FieldState, T: float, cadence: float | None = None,
           on_step: Callable | None = None) -> Trajectory:
    """March to ``T``; snapshots land exactly on multiples of ``cadence``."""
    traj = Trajectory(snapshots=[state])
    v, h, t = state.v, state.h, state.t
    t_end = state.t + T
    marks = [state.t + m for m in _time_marks(T, cadence)]
    mass = solver.mass(v, h)
    for mark in marks:
        while t < mark:
            dt = min(solver.stable_dt(v), mark - t)
            if mark - (t + dt) < 1e-12 * max(1.0, t_end):
                dt = mark - t
            v_new, h_new, _, k1, inflow = solver.rk4(v, h, dt, t)
            new_mass = solver.mass(v_new, h_new)
            traj.monitors.append(solver.monitor(t, v, h, k1[0], k1[1],
                                                new_mass - mass, inflow, dt))
            v, h, mass = v_new, h_new, new_mass
            t = mark if dt == mark - t else t + dt
            if on_step is not None:
                on_step(t, v, h)
        traj.snapshots.append(replace(state, v=v, h=h, t=t))
    return traj


def perturbed_state(profile: ShockProfile, perturbation: PerturbationSpec,
                    floor: float = 1e-6) -> FieldState:
    perturbation.check_support(profile.L)
    dv, dh = perturbation.fields(profile.grid)
    state = FieldState.from_profile(profile)
    if perturbation.is_zero:
        return state
    v = state.v + dv
    if not np.min(v) > floor:
        raise VacuumProximityError("initial data reaches the positivity floor", 0.0)
    return replace(state, v=v, h=state.h + dh)


def simulate(config) -> Trajectory:
    """Run the solver described by a :class:`~shocklab.harness.config.RunConfig`."""
    from .model import solve_rankine_hugoniot
    from .profiles import build_profile

    es = solve_rankine_hugoniot(config.shock.v_minus, config.shock.u_minus,
                                config.shock.eps, config.shock.family)
    model = GasModel(config.model.alpha)
    num = config.numerics
    profile = build_profile(es, model, num.L, num.N)
    solver = Solver(profile, cfl=num.cfl, positivity_floor=num.positivity_floor,
                    well_balanced=num.well_balanced)
    state = perturbed_state(profile, config.perturbation, num.positivity_floor)
    return evolve(solver, state, config.time.T, num.snapshot_cadence)
