"""Isothermal gas law, relative quantities and shock end states.

Everything here is a pure function of its arguments. Array arguments are
accepted wherever a scalar is, and the return type follows numpy rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError


def _require_positive(x, name: str) -> None:
    arr = np.asarray(x)
    if not np.all(arr > 0):
        raise DomainError(f"{name} must be positive, got min {np.min(arr)!r}")


# {{{ gas law

@dataclass(frozen=True)
class GasModel:
    """Viscosity law ``mu(v) = b v^{-alpha}`` with ``b = 1``."""

    alpha: float = 0.0
    b: float = field(default=1.0, init=False)

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha!r}")

    @property
    def beta(self) -> float:
        return 1.0 - self.alpha


def pressure(v):
    _require_positive(v, "v")
    return 1.0 / np.asarray(v, dtype=float) if np.ndim(v) else 1.0 / float(v)


def pressure_deriv(v):
    _require_positive(v, "v")
    v = np.asarray(v, dtype=float) if np.ndim(v) else float(v)
    return -1.0 / (v * v)


def phi(z):
    """``z - 1 - log z``: the convex entropy kernel, zero only at ``z = 1``."""
    _require_positive(z, "z")
    if np.ndim(z):
        z = np.asarray(z, dtype=float)
        return z - 1.0 - np.log(z)
    z = float(z)
    return z - 1.0 - math.log(z)


def rel_pressure(v, w):
    """Relative pressure ``p(v) - p(w) - p'(w)(v - w)``.

    For ``p = 1/v`` this collapses to ``(v - w)^2 / (v w^2) = v (p(v) - p(w))^2``.
    """
    _require_positive(v, "v")
    _require_positive(w, "w")
    dp = pressure(v) - pressure(w)
    return v * dp * dp

# }}}


# {{{ end states

class Family(Enum):
    one = 1
    two = 2

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, Family):
            return value
        key = str(value).strip().lower()
        if key in ("1", "one"):
            return cls.one
        if key in ("2", "two"):
            return cls.two
        raise DomainError(f"unknown shock family {value!r}")


@dataclass(frozen=True)
class EndStates:
    v_minus: float
    u_minus: float
    v_plus: float
    u_plus: float
    sigma: float
    eps: float
    family: Family = Family.two

    @property
    def p_minus(self) -> float:
        return 1.0 / self.v_minus

    @property
    def p_plus(self) -> float:
        return 1.0 / self.v_plus

    @property
    def sigma_star(self) -> float:
        """Characteristic speed ``sqrt(-p'(v_-))`` of the left state."""
        return 1.0 / self.v_minus

    @property
    def jump_v(self) -> float:
        return abs(self.v_plus - self.v_minus)

    def rh_residual(self) -> float:
        dv = self.v_plus - self.v_minus
        du = self.u_plus - self.u_minus
        dp = self.p_plus - self.p_minus
        return abs(-self.sigma * dv - du) + abs(-self.sigma * du + dp)

    def reflected(self) -> "EndStates":
        """Mirror image under ``x -> -x, u -> -u``: swaps the two families."""
        other = Family.one if self.family is Family.two else Family.two
        return EndStates(v_minus=self.v_plus, u_minus=-self.u_plus,
                         v_plus=self.v_minus, u_plus=-self.u_minus,
                         sigma=-self.sigma, eps=self.eps, family=other)


def solve_rankine_hugoniot(v_minus: float, u_minus: float, eps: float,
                           family="two") -> EndStates:
    """End states of a Lax shock of pressure jump ``eps`` issued from ``(v_-, u_-)``.

    Family two: ``p_+ = p_- - eps``. Family one is built as the mirror image
    of a family-two shock.
    """
    family = Family.parse(family)
    _require_positive(v_minus, "v_minus")
    if eps == 0:
        raise DomainError("eps = 0: degenerate shock, no jump exists")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    p_minus = 1.0 / v_minus

    if family is Family.two:
        if eps >= p_minus:
            raise DomainError(
                f"amplitude exceeds p(v_minus): eps={eps!r} >= {p_minus!r}")
        v_plus = 1.0 / (p_minus - eps)
        sigma = math.sqrt(eps / (v_plus - v_minus))
        u_plus = u_minus - sigma * (v_plus - v_minus)
        return EndStates(v_minus, u_minus, v_plus, u_plus, sigma, eps, family)

    # family one: the mirror of a 2-shock whose left state is our right state
    v_plus = 1.0 / (p_minus + eps)
    sigma = -math.sqrt(eps / (v_minus - v_plus))
    u_plus = u_minus - sigma * (v_plus - v_minus)
    return EndStates(v_minus, u_minus, v_plus, u_plus, sigma, eps, family)


@dataclass(frozen=True)
class RiemannShock:
    """The inviscid step with the same end states, located at ``xi = 0``."""

    end_states: EndStates

    def __call__(self, xi):
        es = self.end_states
        xi = np.asarray(xi, dtype=float)
        v = np.where(xi < 0, es.v_minus, es.v_plus)
        u = np.where(xi < 0, es.u_minus, es.u_plus)
        if v.ndim == 0:
            return float(v), float(u)
        return v, u

# }}}
