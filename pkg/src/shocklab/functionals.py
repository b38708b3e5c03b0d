"""Weighted relative-entropy functionals around a viscous shock.

All integrals use the composite trapezoid rule on the profile grid and all
derivatives of the perturbed state are second-order centered differences
(one-sided at the two ends).  Profile derivatives are taken from the exact
ODE values stored on the profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum

import numpy as np

from .dynamics import FieldState
from .errors import DomainError, ProfileError, ShiftWindowError
from .model import Family, phi, rel_pressure
from .profiles import ShockProfile


# {{{ quadrature helpers

def trapezoid_weights(n: int, dx: float) -> np.ndarray:
    q = np.full(n, dx)
    q[0] = q[-1] = 0.5 * dx
    return q


def integrate(f, grid) -> float:
    grid = np.asarray(grid, dtype=float)
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(grid)))


def centered_diff(f: np.ndarray, dx: float) -> np.ndarray:
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)
    d[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx)
    return d

# }}}


# {{{ relative entropies

def eta_rel(v1, u1, v2, u2, grid=None):
    """Pointwise ``Phi(v1/v2) + (u1 - u2)^2 / 2`` and, given a grid, its integral."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    du = np.asarray(u1, dtype=float) - np.asarray(u2, dtype=float)
    density = phi(v1 / v2) + 0.5 * du * du
    if grid is None:
        return density, None
    return density, integrate(np.broadcast_to(density, np.shape(grid)), grid)


def effective_velocity(u, v, dv, alpha: float, nu: float = 1.0):
    return u - nu * dv / v ** (1.0 + alpha)


def bd_rel_E(v1, u1, dv1, v2, u2, dv2, grid, alpha: float = 0.0, nu: float = 1.0) -> float:
    """Relative functional built on the effective velocity ``u - nu v_x / v^{alpha+1}``."""
    h1 = effective_velocity(np.asarray(u1, dtype=float), np.asarray(v1, dtype=float),
                            np.asarray(dv1, dtype=float), alpha, nu)
    h2 = effective_velocity(np.asarray(u2, dtype=float), np.asarray(v2, dtype=float),
                            np.asarray(dv2, dtype=float), alpha, nu)
    return eta_rel(v1, h1, v2, h2, grid)[1]

# }}}


# {{{ weight

@dataclass(frozen=True, eq=False)
class Weight:
    a: np.ndarray
    a_prime: np.ndarray
    lam: float


def build_weight(profile: ShockProfile, lam: float) -> Weight:
    """``a = 1 - (lam/eps)(p(v_tilde) - p_-)``, increasing from 1 to ``1 + lam``."""
    if not 0 < lam < 1:
        raise DomainError(f"lambda must lie in (0, 1), got {lam!r}")
    es = profile.end_states
    if es.family is not Family.two:
        raise DomainError("the weighted functionals are set up for family-two shocks")
    scale = lam / es.eps
    a = 1.0 - scale * (profile.p_tilde - es.p_minus)
    a_prime = -scale * profile.dp_tilde
    return Weight(a=a, a_prime=a_prime, lam=lam)

# }}}


# {{{ shift

def shift_arrays(v: np.ndarray, h: np.ndarray, X: float, dx: float):
    """Values at ``xi + X`` by four-point cubic Lagrange interpolation.

    Outside the grid the fields are continued by their boundary values,
    which are the far-field constants.
    """
    if X == 0.0:
        return v.copy(), h.copy()
    m = math.floor(X / dx)
    th = X / dx - m
    w = (-th * (th - 1.0) * (th - 2.0) / 6.0,
         (th + 1.0) * (th - 1.0) * (th - 2.0) / 2.0,
         -(th + 1.0) * th * (th - 2.0) / 2.0,
         (th + 1.0) * th * (th - 1.0) / 6.0)
    n = len(v)
    pad = abs(m) + 2
    out = []
    for f in (v, h):
        fp = np.concatenate((np.full(pad, f[0]), f, np.full(pad, f[-1])))
        base = pad + m
        g = (w[0] * fp[base - 1:base - 1 + n] + w[1] * fp[base:base + n]
             + w[2] * fp[base + 1:base + 1 + n] + w[3] * fp[base + 2:base + 2 + n])
        out.append(g)
    return out[0], out[1]


def shifted_field(state: FieldState, X: float) -> FieldState:
    L = 0.5 * (state.grid[-1] - state.grid[0])
    if abs(X) > L / 4:
        raise ShiftWindowError(f"|X| = {abs(X)!r} exceeds L/4 = {L / 4!r}")
    v, h = shift_arrays(state.v, state.h, X, state.dx)
    return replace(state, v=v, h=h)

# }}}


# {{{ truncation

class TruncationKind(Enum):
    two_sided = "two_sided"
    lower_only = "lower_only"
    upper_only = "upper_only"


@dataclass(frozen=True)
class TruncationMode:
    kind: TruncationKind
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError("truncation level k must be positive")

    def apply(self, y):
        if self.kind is TruncationKind.two_sided:
            return np.clip(y, -self.k, self.k)
        if self.kind is TruncationKind.lower_only:
            return np.maximum(y, -self.k)
        return np.minimum(y, self.k)


def truncate_arrays(v, v_tilde, mode: TruncationMode):
    pt = 1.0 / v_tilde
    p_bar = pt + mode.apply(1.0 / v - pt)
    assert np.all(p_bar > 0), "truncated pressure must stay positive"
    return 1.0 / p_bar


def truncate(v_field, profile: ShockProfile, mode: TruncationMode):
    """``v_bar`` with ``p(v_bar) - p(v_tilde) = psi(p(v) - p(v_tilde))``."""
    v = np.asarray(v_field, dtype=float)
    if not np.all(v > 0):
        raise DomainError("v must be positive")
    return truncate_arrays(v, profile.v_tilde, mode)

# }}}


# {{{ decomposition

@dataclass(frozen=True)
class FunctionalReport:
    Y: float
    Y_g: float
    Y_b: float
    Y_l: float
    Y_s: float
    J_bad: float
    J_para: float
    J_good: float
    B1_plus: float
    B1_minus: float
    B2: float
    B3: float
    B4: float
    B5: float
    Gh_plus: float
    Gh_minus: float
    Gv: float
    D: float
    wre: float
    I_gY: float
    I1: float
    I2: float
    delta3: float
    # evaluated at the delta3-truncation of v, used by the estimate ledger
    Gv_bar: float = 0.0
    # unweighted integrals used by the vanishing-viscosity estimates
    eta: float = 0.0
    vphi: float = 0.0
    diss: float = 0.0

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> list[float]:
        return [getattr(self, n) for n in self.names()]

    @property
    def bad(self) -> float:
        return self.B1_plus + self.B1_minus + self.B2

    @property
    def good(self) -> float:
        return self.Gh_plus + self.Gh_minus + self.Gv + self.D


class FunctionalContext:
    """Profile-dependent arrays reused across many evaluations."""

    def __init__(self, profile: ShockProfile, weight: Weight):
        if len(weight.a) != profile.N:
            raise DomainError("weight and profile grids differ")
        self.profile = profile
        self.weight = weight
        self.sigma = profile.end_states.sigma
        self.beta = profile.model.beta
        self.dx = profile.dx
        self.q = trapezoid_weights(profile.N, profile.dx)
        self.vt = profile.v_tilde
        self.pt = profile.p_tilde
        self.ht = profile.h_tilde
        self.dvt = profile.dv_tilde
        self.dpt = profile.dp_tilde
        self.dht = profile.dh_tilde
        self.a = weight.a
        self.ap = weight.a_prime
        self.vt_beta = self.vt ** self.beta
        self.qa = self.q * self.a
        self.qap = self.q * self.ap

    def core(self, v, h):
        """``Y``, ``J_bad`` and ``J_para``: all the shift equation needs."""
        sigma = self.sigma
        dp = 1.0 / v - self.pt
        dh = h - self.ht
        dv = v - self.vt
        eta = phi(v / self.vt) + 0.5 * dh * dh
        Y = -self.qap @ eta + self.qa @ (-self.dpt * dv + self.dht * dh)
        J_bad = self.qap @ (dp * dh) + sigma * (self.qa @ (self.dvt * v * dp * dp))
        ddp = centered_diff(dp, self.dx)
        vb = v ** self.beta
        J_para = -(self.qap @ (vb * dp * ddp)) - self.qap @ (self.dpt * dp * (vb - self.vt_beta)) \
            - self.qa @ (self.dpt * ddp * (vb - self.vt_beta))
        return float(Y), float(J_bad), float(J_para)

    def _functionals_i(self, v, pt_mask=None):
        """``I_gY``, ``I1``, ``I2`` and ``G_v`` of a v-field."""
        sigma = self.sigma
        dp = 1.0 / v - self.pt
        Phi = phi(v / self.vt)
        I_gY = (-(self.qap @ (dp * dp)) / (2 * sigma ** 2) - self.qap @ Phi
                - self.qa @ (self.dpt * (v - self.vt)) + (self.qa @ (self.dht * dp)) / sigma)
        I1 = (self.qap @ (dp * dp)) / (2 * sigma)
        I2 = sigma * (self.qa @ (self.dvt * v * dp * dp))
        Gv = sigma * (self.qap @ Phi)
        return float(I_gY), float(I1), float(I2), float(Gv)

    def decompose(self, v, h, delta3: float) -> FunctionalReport:
        if v.shape != self.vt.shape or h.shape != self.vt.shape:
            raise DomainError("state and profile grids differ")
        if not delta3 > 0:
            raise DomainError("delta3 must be positive")
        sigma, qa, qap = self.sigma, self.qa, self.qap
        dp = 1.0 / v - self.pt
        dh = h - self.ht
        dv = v - self.vt
        Phi = phi(v / self.vt)
        eta = Phi + 0.5 * dh * dh
        ddp = centered_diff(dp, self.dx)
        vb = v ** self.beta
        dvb = vb - self.vt_beta
        omega = dp <= delta3
        out = ~omega
        wdev = dh - dp / sigma   # h - h~ - (p - p~)/sigma

        lin_v = -self.dpt * dv          # -p(v~)' (v - v~)
        lin_h = self.dht * dh           # h~' (h - h~)
        Y = -(qap @ eta) + qa @ (lin_v + lin_h)

        om = omega.astype(float)
        oc = out.astype(float)
        Y_g = (-(qap @ (om * dp * dp)) / (2 * sigma ** 2) - qap @ (om * Phi)
               - qa @ (om * self.dpt * dv) + (qa @ (om * self.dht * dp)) / sigma)
        Y_b = -0.5 * (qap @ (om * wdev * wdev)) - (qap @ (om * dp * wdev)) / sigma
        Y_l = qa @ (om * self.dht * wdev)
        Y_s = (-(qap @ (oc * Phi)) - qa @ (oc * self.dpt * dv)
               - 0.5 * (qap @ (oc * dh * dh)) + qa @ (oc * self.dht * dh))

        B2 = sigma * (qa @ (self.dvt * v * dp * dp))
        J_bad = qap @ (dp * dh) + B2
        B3 = -(qap @ (vb * dp * ddp))
        B4 = -(qap @ (self.dpt * dp * dvb))
        B5 = -(qa @ (self.dpt * ddp * dvb))
        Gv = sigma * (qap @ Phi)
        D = qa @ (vb * ddp * ddp)
        J_good = Gv + 0.5 * sigma * (qap @ (dh * dh)) + D

        B1_plus = (qap @ (om * dp * dp)) / (2 * sigma)
        B1_minus = qap @ (oc * dp * dh)
        Gh_plus = 0.5 * sigma * (qap @ (om * wdev * wdev))
        Gh_minus = 0.5 * sigma * (qap @ (oc * dh * dh))

        vbar = truncate_arrays(v, self.vt, TruncationMode(TruncationKind.two_sided, delta3))
        I_gY, I1, I2, Gv_bar = self._functionals_i(vbar)

        q = self.q
        return FunctionalReport(
            Y=float(Y), Y_g=float(Y_g), Y_b=float(Y_b), Y_l=float(Y_l), Y_s=float(Y_s),
            J_bad=float(J_bad), J_para=float(B3 + B4 + B5), J_good=float(J_good),
            B1_plus=float(B1_plus), B1_minus=float(B1_minus), B2=float(B2),
            B3=float(B3), B4=float(B4), B5=float(B5),
            Gh_plus=float(Gh_plus), Gh_minus=float(Gh_minus), Gv=float(Gv), D=float(D),
            wre=float(qa @ eta), I_gY=I_gY, I1=I1, I2=I2, delta3=float(delta3),
            Gv_bar=Gv_bar, eta=float(q @ eta), vphi=float(q @ (self.dvt * Phi)),
            diss=float(q @ (vb * ddp * ddp)))


def decompose(state_shifted: FieldState, profile: ShockProfile, weight: Weight,
              delta3: float) -> FunctionalReport:
    if state_shifted.v.shape != profile.grid.shape:
        raise DomainError("state and profile grids differ")
    return FunctionalContext(profile, weight).decompose(state_shifted.v, state_shifted.h, delta3)


def main_functional(r: FunctionalReport, eps: float, lam: float, delta0: float):
    """The combination ``R(U)`` that must be nonpositive when ``|Y| <= eps^2``.

    Returns ``(R, scale)`` where ``scale`` is the sum of magnitudes of the
    terms, used to size a quadrature tolerance.
    """
    el = eps / lam
    bad = r.bad
    terms = (-r.Y ** 2 / eps ** 4, bad, delta0 * el * abs(bad), delta0 * el * r.B1_plus,
             r.J_para, delta0 * abs(r.J_para), -r.Gh_minus, -0.5 * r.Gh_plus,
             -(1 - delta0 * el) * r.Gv, -(1 - delta0) * r.D)
    return float(sum(terms)), float(sum(abs(t) for t in terms))

# }}}


# {{{ normalized variables and the Jacobian identity

def pressure_coordinate(profile: ShockProfile) -> np.ndarray:
    es = profile.end_states
    return (es.p_minus - profile.p_tilde) / es.eps


def normalized_vars(v_field, profile: ShockProfile, lam: float, n: int = 1001):
    """``(y, w, W)`` on a uniform grid of ``[0, 1]``.

    ``y`` is the normalized pressure of the profile, which is monotone in
    ``xi``; ``w = p(v) - p(v_tilde)`` is carried over to the ``y`` variable
    and ``W = (lam / eps) w``.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    es = profile.end_states
    y_xi = pressure_coordinate(profile)
    if np.any(np.diff(y_xi) < 0):
        raise ProfileError("p(v_tilde) is not monotone")
    w_xi = 1.0 / np.asarray(v_field, dtype=float) - profile.p_tilde
    keep = np.concatenate(([True], np.diff(y_xi) > 0))
    y = np.linspace(0.0, 1.0, n)
    w = np.interp(y, y_xi[keep], w_xi[keep])
    return y, w, (lam / es.eps) * w


def jacobian_check(profile: ShockProfile) -> dict:
    """Deviation of ``nu v^beta y' / (y(1-y))`` from ``(eps/sigma) v`` on the grid.

    ``y'`` is a centered difference. Also returns the deviation from the
    small-shock constant ``eps / sigma_*^2``, normalized by ``eps^2``.
    """
    es = profile.end_states
    y = pressure_coordinate(profile)
    dy = np.full_like(y, np.nan)
    dy[1:-1] = (y[2:] - y[:-2]) / (2 * profile.dx)
    sel = np.zeros_like(y, dtype=bool)
    sel[1:-1] = (y[1:-1] >= 1e-6) & (y[1:-1] <= 1 - 1e-6)
    vt = profile.v_tilde[sel]
    lhs = profile.nu * vt ** profile.model.beta * dy[sel] / (y[sel] * (1 - y[sel]))
    dev = np.abs(lhs - es.eps / es.sigma * vt)
    norm = np.abs(lhs - es.eps / es.sigma_star ** 2) / es.eps ** 2
    return {"max_deviation": float(dev.max()), "normalized": float(norm.max()),
            "lhs": lhs, "xi": profile.grid[sel]}

# }}}


# {{{ estimate ledger

def _ledger_terms(r: FunctionalReport, eps: float, lam: float) -> dict:
    el = eps / lam
    d3 = r.delta3
    return {
        "bo1p": (abs(r.B1_plus - r.I1), el * r.D + eps ** 6 / lam ** 4 * r.Gv),
        "bo1m": (abs(r.B1_minus), d3 * r.Gh_minus + el ** 0.75 * r.D + eps ** 6 / lam ** 4 * r.Gv),
        "bo2": (abs(r.B2 - r.I2),
                el ** 2 * r.D + eps ** 7 / lam ** 5 * r.Gv + el * (r.Gv - r.Gv_bar)),
        "bo": (abs(r.bad) + abs(r.B1_plus), eps ** 2 / lam + el ** 0.75 * r.D),
        "para-B3": (abs(r.B3), lam * r.D + eps * r.Gv),
        "para-B4": (abs(r.B4), eps ** 3 / lam * r.D + eps ** 2 * r.Gv),
        "para-B5": (abs(r.B5), el * r.D + eps ** 2 * r.Gv),
        "para-total": (abs(r.J_para), (lam + el) * r.D + eps * r.Gv),
        "para-tot": (abs(r.J_para), eps ** 2 / lam + (lam + el) * r.D),
        "Y-conc": ((r.Y_g - r.I_gY) ** 2 + r.Y_b ** 2 + r.Y_l ** 2 + r.Y_s ** 2,
                   eps ** 2 / lam * (el * r.D + math.sqrt(el) * r.Gv + (r.Gv - r.Gv_bar)
                                     + r.Gh_minus + math.sqrt(1 / el) * r.Gh_plus)),
    }


LEDGER_FAMILIES = ("locE", "bo1p", "bo1m", "bo2", "bo", "para-B3", "para-B4",
                   "para-B5", "para-total", "para-tot", "Y-conc")


@dataclass(frozen=True)
class LedgerRow:
    family: str
    ratio: float          # nan when every sample had both sides zero
    n_samples: int


def ledger_pairs(r: FunctionalReport, eps: float, lam: float, sigma: float) -> dict:
    """LHS and RHS (with every constant set to 1) of each estimate family."""
    # int a' Phi = Gv / sigma and int a' (h - h~)^2 = 2 (J_good - Gv - D) / sigma
    loc_lhs = (r.Gv + 2.0 * (r.J_good - r.Gv - r.D)) / sigma
    pairs = {"locE": (loc_lhs, eps ** 2 / lam)}
    pairs.update(_ledger_terms(r, eps, lam))
    return pairs


def estimate_ledger(reports, eps: float, lam: float, sigma: float) -> list[LedgerRow]:
    """Empirical constants: sup of LHS/RHS over samples with ``|Y| <= eps^2``."""
    best = {k: float("nan") for k in LEDGER_FAMILIES}
    count = 0
    for r in reports:
        if abs(r.Y) > eps ** 2:
            continue
        count += 1
        for name, (lhs, rhs) in ledger_pairs(r, eps, lam, sigma).items():
            if lhs == 0 and rhs == 0:
                continue
            ratio = math.inf if rhs <= 0 else lhs / rhs
            if math.isnan(best[name]) or ratio > best[name]:
                best[name] = ratio
    return [LedgerRow(k, best[k], count) for k in LEDGER_FAMILIES]

# }}}
