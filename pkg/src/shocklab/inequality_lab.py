"""Sampling verifiers for the scalar inequalities behind the contraction estimate.

Two groups live here: the nonlinear Poincare-type functional on the unit
interval with the degenerate weight ``y(1-y)``, and the global/local bounds on
``Phi(v/w)`` and the relative pressure.  All searches are seeded through
``numpy.random.SeedSequence`` so that a fixed master seed reproduces the exact
same numbers regardless of how the work is chunked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import phi


N_MODES = 16
DEFAULT_GRID = 1025
N_CHUNKS = 8


# {{{ Poincare functional

@dataclass(frozen=True)
class PoincareSample:
    W: np.ndarray
    delta: float
    C1: float = math.inf

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.ndim != 1 or W.size < 3:
            raise ValueError("poincare sample needs at least 3 grid points")
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        object.__setattr__(self, "W", W)
        l2 = float(_quad_weights(W.size) @ (W * W))
        if l2 > self.C1 * (1.0 + 1e-12):
            raise DomainError(f"sample violates the L2 ball: {l2} > {self.C1}")

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.W.size)


def _quad_weights(n: int) -> np.ndarray:
    q = np.full(n, 1.0 / (n - 1))
    q[0] = q[-1] = 0.5 / (n - 1)
    return q


def _diff_matrix(n: int) -> np.ndarray:
    """Dense centered difference on the uniform unit grid, one-sided at ends."""
    h = 1.0 / (n - 1)
    D = np.zeros((n, n))
    i = np.arange(1, n - 1)
    D[i, i - 1] = -0.5 / h
    D[i, i + 1] = 0.5 / h
    D[0, :3] = np.array([-3.0, 4.0, -1.0]) / (2 * h)
    D[-1, -3:] = np.array([1.0, -4.0, 3.0]) / (2 * h)
    return D


def _dW(W: np.ndarray) -> np.ndarray:
    # works row-wise on stacked samples
    h = 1.0 / (W.shape[-1] - 1)
    d = np.empty_like(W)
    d[..., 1:-1] = (W[..., 2:] - W[..., :-2]) / (2 * h)
    d[..., 0] = (-3 * W[..., 0] + 4 * W[..., 1] - W[..., 2]) / (2 * h)
    d[..., -1] = (3 * W[..., -1] - 4 * W[..., -2] + W[..., -3]) / (2 * h)
    return d


def _R_rows(W: np.ndarray, delta: float) -> np.ndarray:
    n = W.shape[-1]
    q = _quad_weights(n)
    y = np.linspace(0.0, 1.0, n)
    I2 = (W * W) @ q
    I1 = W @ q
    I3 = (W ** 3) @ q
    Iabs = np.abs(W) ** 3 @ q
    Dt = (y * (1 - y) * _dW(W) ** 2) @ q
    return (-(I2 + 2 * I1) ** 2 / delta + (1 + delta) * I2 + (2.0 / 3.0) * I3
            + delta * Iabs - (1 - delta) * Dt)


def poincare_R(sample: PoincareSample) -> float:
    return float(_R_rows(sample.W, sample.delta))


def poincare_gradient(W: np.ndarray, delta: float) -> np.ndarray:
    """Gradient of the discrete functional with respect to the nodal values."""
    W = np.asarray(W, dtype=float)
    n = W.size
    q = _quad_weights(n)
    y = np.linspace(0.0, 1.0, n)
    D = _diff_matrix(n)
    I2 = q @ (W * W)
    I1 = q @ W
    s = I2 + 2 * I1
    g = (-(2 * s / delta) * (2 * W + 2) + 2 * (1 + delta) * W + 2 * W * W
         + 3 * delta * W * np.abs(W)) * q
    g -= (1 - delta) * 2 * D.T @ (q * y * (1 - y) * (D @ W))
    return g

# }}}


# {{{ randomized search

def fourier_basis(n: int, modes: int = N_MODES) -> np.ndarray:
    """Columns: constant, then cos(k pi y), sin(k pi y) for k = 1..modes."""
    y = np.linspace(0.0, 1.0, n)
    cols = [np.ones(n)]
    for k in range(1, modes + 1):
        cols.append(np.cos(k * np.pi * y))
        cols.append(np.sin(k * np.pi * y))
    return np.stack(cols, axis=1)


def _mode_index(modes: int) -> np.ndarray:
    return np.concatenate([[0], np.repeat(np.arange(1, modes + 1), 2)])


def _draw_coefficients(rng: np.random.Generator, count: int, modes: int) -> np.ndarray:
    k = _mode_index(modes)
    kmax = rng.integers(0, modes + 1, size=count)
    decay = rng.choice([0.0, 1.0, 2.0], size=count)
    scale = (1.0 + k[None, :]) ** (-decay[:, None])
    c = rng.standard_normal((count, k.size)) * scale
    c[k[None, :] > kmax[:, None]] = 0.0
    return c


@dataclass
class PoincareSearch:
    delta: float
    C1: float
    max_R: float
    argmax_W: np.ndarray
    y: np.ndarray
    sampled_max: float
    n_samples: int
    ascent_steps: int

    def rows(self):
        return list(zip(self.y.tolist(), self.argmax_W.tolist()))


def _search_chunk(args):
    seed_seq, count, delta, C1, basis, q = args
    rng = np.random.default_rng(seed_seq)
    c = _draw_coefficients(rng, count, basis.shape[1] // 2)
    W = c @ basis.T
    l2 = (W * W) @ q
    radius2 = C1 * rng.uniform(0.0, 1.0, size=count)
    # samples that came out identically zero stay zero
    scale = np.sqrt(np.divide(radius2, l2, out=np.zeros(count), where=l2 > 0))
    c *= scale[:, None]
    W *= scale[:, None]
    return c, _R_rows(W, delta)


def _ascend(c, delta, C1, basis, q, steps):
    M = basis.T @ (q[:, None] * basis)

    def project(c):
        m = c @ M @ c
        return c * math.sqrt(C1 / m) if m > C1 else c

    def R_of(c):
        return float(_R_rows(basis @ c, delta))

    c = project(c)
    R = R_of(c)
    tau = 1e-2
    for _ in range(steps):
        g = basis.T @ poincare_gradient(basis @ c, delta)
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            break
        while tau > 1e-14:
            trial = project(c + tau * g / gn)
            Rt = R_of(trial)
            if Rt > R:
                c, R = trial, Rt
                tau *= 2.0
                break
            tau *= 0.5
        else:
            break
    return c, R


def poincare_search(delta: float, C1: float, n_samples: int = 10_000, seed: int = 1,
                    n_grid: int = DEFAULT_GRID, n_refine: int = 20,
                    ascent_steps: int = 200, runner=map) -> PoincareSearch:
    """Largest value of the functional found over the ``int W^2 <= C1`` ball."""
    if not (delta > 0 and C1 > 0):
        raise DomainError("delta and C1 must be positive")
    basis = fourier_basis(n_grid)
    q = _quad_weights(n_grid)
    children = np.random.SeedSequence(seed).spawn(N_CHUNKS)
    sizes = [n_samples // N_CHUNKS + (i < n_samples % N_CHUNKS) for i in range(N_CHUNKS)]
    parts = list(runner(_search_chunk,
                        [(s, k, delta, C1, basis, q) for s, k in zip(children, sizes)]))
    C = np.concatenate([p[0] for p in parts])
    R = np.concatenate([p[1] for p in parts])
    order = np.argsort(-R, kind="stable")[:n_refine]
    best_c, best_R = np.zeros(basis.shape[1]), 0.0   # W = 0 is always admissible
    sampled_max = float(R.max()) if R.size else 0.0
    for i in order:
        c, r = _ascend(C[i], delta, C1, basis, q, ascent_steps)
        if r > best_R:
            best_c, best_R = c, r
    if sampled_max > best_R:
        i = int(np.argmax(R))
        best_c, best_R = C[i], sampled_max
    return PoincareSearch(delta, C1, best_R, basis @ best_c, np.linspace(0, 1, n_grid),
                          sampled_max, n_samples, ascent_steps)


def delta_boundary(C1: float, lo: float = 1e-3, hi: float = 0.5, n_samples: int = 2000,
                   seed: int = 1, tol: float = 1e-3, slack: float = 1e-9) -> float:
    """Bisection for the largest delta at which the search finds no positive value."""
    def ok(d):
        return poincare_search(d, C1, n_samples, seed, n_grid=257, n_refine=8).max_R <= slack

    if not ok(lo):
        return 0.0
    if ok(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo

# }}}


# {{{ global bounds on Phi

@dataclass
class PhiBoundsReport:
    c1_low: float
    c1_high: float
    c2: float
    c3: dict
    sim_violations: int
    sim_samples: int
    n_samples: int

    @property
    def c1(self) -> float:
        return min(self.c1_low, self.c1_high)

    def rows(self):
        out = [("c1_low", self.c1_low), ("c1_high", self.c1_high), ("c1", self.c1),
               ("c2", self.c2), ("sim_violations", self.sim_violations)]
        out += [(f"c3[{d:g}]", v) for d, v in self.c3.items()]
        return out


ROUNDING = 16 * np.finfo(float).eps


def check_phi_bounds(v_minus: float, n_samples: int = 100_000, seed: int = 0,
                     star_fractions=(0.05, 0.1, 0.2)) -> PhiBoundsReport:
    if not v_minus > 0:
        raise DomainError("v_minus must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    vm = v_minus

    w = rng.uniform(0.5 * vm, 2 * vm, n_samples)
    v = rng.uniform(vm / 3, 3 * vm, n_samples)
    keep = v != w
    w, v = w[keep], v[keep]
    ratio = phi(v / w) / (v - w) ** 2
    c1_low, c1_high = float(ratio.min()), float((1.0 / ratio).min())

    w = rng.uniform(0.5 * vm, 2 * vm, n_samples)
    side = rng.integers(0, 2, n_samples).astype(bool)
    near = rng.integers(0, 2, n_samples).astype(bool)
    spread = np.where(near, rng.uniform(0, 1e-3, n_samples),
                      rng.uniform(0, math.log(1e3), n_samples))
    v = np.where(side, vm * 3 * np.exp(spread), vm / 3 * np.exp(-spread))
    c2 = float((phi(v / w) / np.abs(v - w)).min())

    # ordering along rays: u between w and v
    w = rng.uniform(0.5 * vm, 2 * vm, n_samples)
    v = w * np.exp(rng.uniform(-math.log(1e3), math.log(1e3), n_samples))
    u = w + rng.uniform(0, 1, n_samples) * (v - w)
    pv, pu = phi(v / w), phi(u / w)
    sim_violations = int(np.count_nonzero(pv < pu - ROUNDING * (1 + pu)))

    c3 = {}
    for frac in star_fractions:
        d = frac * vm
        w = rng.uniform(0.5 * vm, 2 * vm, n_samples)
        sgn = np.where(rng.integers(0, 2, n_samples) == 1, 1.0, -1.0)
        # half the draws hug |v - w| = d where the infimum sits
        near = rng.integers(0, 2, n_samples).astype(bool)
        far = d * np.where(near, 1.0 + rng.uniform(0, 1e-3, n_samples),
                           np.exp(rng.uniform(0, math.log(1e3), n_samples)))
        far = np.where(sgn < 0, np.minimum(far, w * (1 - 1e-9)), far)
        v = w + sgn * far
        ok = np.abs(v - w) > d
        u = w + sgn * np.where(near, rng.uniform(0, 1e-3, n_samples),
                               rng.uniform(0, 1, n_samples)) * d
        w, v, u = w[ok], v[ok], u[ok]
        c3[frac] = float(((phi(v / w) - phi(u / w)) / np.abs(v - u)).min())
    return PhiBoundsReport(c1_low, c1_high, c2, c3, sim_violations, n_samples, n_samples)

# }}}


# {{{ local expansions

@dataclass
class LocalRow:
    delta: float
    n_samples: int
    est1_lower_violations: int
    est1_upper_violations: int
    est1_upper_violations_expansion: int   # v >= w
    est1_upper_violations_compression: int  # v < w
    p_est1_C: float
    v_quad_C: float
    p_quad_C: float


@dataclass
class LocalReport:
    v_minus: float
    rows: list = field(default_factory=list)

    def largest_delta(self, name: str):
        """Largest scanned delta with zero violations of the named bound."""
        good = [r.delta for r in self.rows if getattr(r, name) == 0]
        return max(good) if good else None


def check_local_expansions(v_minus: float, delta_grid=(0.01, 0.02, 0.05, 0.1, 0.2),
                           n_samples: int = 1_000_000, seed: int = 0) -> LocalReport:
    if not v_minus > 0:
        raise DomainError("v_minus must be positive")
    p_minus = 1.0 / v_minus
    report = LocalReport(v_minus)
    children = np.random.SeedSequence(seed).spawn(len(delta_grid))
    for d, ss in zip(delta_grid, children):
        if not 0 < d < p_minus:
            raise DomainError(f"delta {d} outside (0, p(v_minus))")
        rng = np.random.default_rng(ss)
        pw = p_minus + rng.uniform(-d, d, n_samples)
        pv = pw + rng.uniform(-d, d, n_samples)
        keep = pv > 0
        pw, pv = pw[keep], pv[keep]
        w, v = 1.0 / pw, 1.0 / pv
        x = v / w - 1.0
        P = phi(v / w)
        tol = ROUNDING * (1 + P)
        lower = int(np.count_nonzero(0.5 * x * x - x ** 3 / 3 > P + tol))
        upper_mask = P > 0.5 * x * x + tol
        upper = int(np.count_nonzero(upper_mask))
        dp = pv - pw
        nz = dp != 0
        relp = v[nz] * (pv[nz] - pw[nz]) ** 2   # p(v|w) for p = 1/v
        p_est1 = float(np.max((relp / dp[nz] ** 2 - 1.0 / pw[nz]) / d))
        Pn = P[nz]
        v_quad = float(np.max((v[nz] - w[nz]) ** 2 / Pn))
        p_quad = float(np.max(dp[nz] ** 2 / Pn))
        report.rows.append(LocalRow(
            d, int(keep.sum()), lower, upper,
            int(np.count_nonzero(upper_mask & (x >= 0))),
            int(np.count_nonzero(upper_mask & (x < 0))),
            p_est1, v_quad, p_quad))
    return report

# }}}
