"""Closed-form separated solutions u(t, x) = G(t) F(x) of u_t = rho_lam u u_xx.

G solves G' = -mu G^2.  For lam = 0 the profile is F(y) = mu (log y - gamma y)_+
in the scaled variable y = x exp(k/mu); for lam > 0, with p = x + lam,

    F(p) = (mu artanh(sqrt(p^2 - lam^2)/p) + p (c - (mu/lam) arcsec(p/lam)) + k)_+ .
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import ArgumentError, BlowUpError, DomainError
from .grid import FieldSeries, Grid
from .weight import WeightContext, rho

INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class SeparatedSolution:
    lam: float
    mu: float
    G0: float = 1.0  # G at time t0
    t0: float = 1.0
    gamma: float | None = None  # lam = 0
    c: float | None = None  # lam > 0
    k: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ArgumentError("mu > 0 is required to avoid finite-time blow-up")
        if not self.G0 > 0:
            raise ArgumentError("G(t0) must be positive")
        if self.lam < 0:
            raise ArgumentError("lambda must be nonnegative")
        if self.lam == 0:
            if self.gamma is None or self.gamma < 0:
                raise ArgumentError("lam = 0 needs gamma >= 0")
        else:
            if self.c is None:
                raise ArgumentError("lam > 0 needs the slope constant c")
            if self.c > 0:
                raise ArgumentError("only the energy-class branch c <= 0 is supported")

    @classmethod
    def saturating(cls, lam: float, mu: float, t0: float = 1.0, **space) -> "SeparatedSolution":
        """Normalization 1/G(t0) = mu t0, i.e. G(t) = 1/(mu t)."""
        return cls(lam=lam, mu=mu, G0=1.0 / (mu * t0), t0=t0, **space)

    @property
    def ctx(self) -> WeightContext:
        return WeightContext(self.lam)

    @property
    def scale(self) -> float:
        """y = scale * x for the lam = 0 family."""
        return math.exp(self.k / self.mu)

    # -- time factor

    def G(self, t):
        t = np.asarray(t, dtype=float)
        den = 1.0 / self.G0 + self.mu * (t - self.t0)
        if np.any(den <= 0):
            raise BlowUpError("1/G(t0) + mu (t - t0) must stay positive")
        out = 1.0 / den
        return out if out.ndim else float(out)

    def dG(self, t):
        return -self.mu * np.square(self.G(t))

    # -- space factor

    def _raw(self, x):
        """The unclipped expression whose positive part is F."""
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError("F is defined for x > 0")
        mu = self.mu
        if self.lam == 0:
            y = self.scale * x
            return mu * (np.log(y) - self.gamma * y)
        lam = self.lam
        p = x + lam
        s = np.sqrt(x * (x + 2.0 * lam))
        arcsec = np.arctan2(s, lam)
        return mu * np.arctanh(s / p) + p * (self.c - (mu / lam) * arcsec) + self.k

    def F(self, x):
        out = np.maximum(self._raw(x), 0.0)
        return out if np.ndim(out) else float(out)

    def dF(self, x):
        """Derivative on the open positive set (0 elsewhere)."""
        x = np.asarray(x, dtype=float)
        if self.lam == 0:
            d = self.mu * (1.0 / x - self.gamma * self.scale)
        else:
            s = np.sqrt(x * (x + 2.0 * self.lam))
            d = self.c - (self.mu / self.lam) * np.arctan2(s, self.lam)
        out = np.where(self._raw(x) > 0, d, 0.0)
        return out if out.ndim else float(out)

    def d2F(self, x):
        x = np.asarray(x, dtype=float)
        if self.lam == 0:
            d = -self.mu / x**2
        else:
            p = x + self.lam
            d = -self.mu / (p * np.sqrt(x * (x + 2.0 * self.lam)))
        out = np.where(self._raw(x) > 0, d, 0.0)
        return out if out.ndim else float(out)

    def u(self, t, x):
        return np.multiply.outer(np.atleast_1d(self.G(t)), np.atleast_1d(self.F(x))).squeeze()

    def u_t(self, t, x):
        return np.multiply.outer(np.atleast_1d(self.dG(t)), np.atleast_1d(self.F(x))).squeeze()

    def series(self, grid: Grid, times) -> FieldSeries:
        """Exact values on ``grid`` at physical ``times`` (the first one becomes the series origin)."""
        t = np.asarray(times, dtype=float)
        vals = np.outer(np.atleast_1d(self.G(t)), self.F(grid.nodes))
        return FieldSeries(grid, t - t[0], vals, float(t[0]), {"source": "separated", "lam": self.lam})

    def support(self) -> tuple[float, float]:
        """Closure of the positive set of F in x."""
        if self.lam == 0:
            pts = support_fixed_points(self.gamma) if self.gamma > 0 else (1.0, math.inf)
            if pts is None:
                return (math.nan, math.nan)
            return (pts[0] / self.scale, pts[1] / self.scale)
        if self.k <= 0:
            return (math.nan, math.nan)
        # raw(0+) = k > 0 and raw is strictly decreasing for c <= 0
        hi = 1.0
        while self._raw(hi) > 0:
            hi *= 2.0
        root = optimize.brentq(self._raw, 1e-300, hi, xtol=1e-14, rtol=1e-14)
        return (0.0, float(root))


def G_mu(t, sol: SeparatedSolution):
    return sol.G(t)


def F_lambda0(y, sol: SeparatedSolution):
    """mu (log y - gamma y)_+ in the scaled variable y."""
    if sol.lam != 0:
        raise ArgumentError("F_lambda0 needs lam = 0")
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("y must be positive")
    out = sol.mu * np.maximum(np.log(y) - sol.gamma * y, 0.0)
    return out if out.ndim else float(out)


def F_lambda_pos(p, sol: SeparatedSolution):
    """The lam > 0 profile as a function of p = x + lam."""
    if sol.lam <= 0:
        raise ArgumentError("F_lambda_pos needs lam > 0")
    p = np.asarray(p, dtype=float)
    if np.any(p <= sol.lam):
        raise DomainError("p must exceed lambda")
    return sol.F(p - sol.lam)


def support_fixed_points(gamma: float):
    """Roots y_- <= y_+ of log y = gamma y, or None when gamma > 1/e."""
    if not gamma > 0:
        raise ArgumentError("gamma must be positive")
    if math.isclose(gamma, INV_E, rel_tol=0, abs_tol=1e-15):
        return (math.e, math.e)
    if gamma > INV_E:
        return None

    def f(y):
        return math.log(y) - gamma * y

    def df(y):
        return 1.0 / y - gamma

    def bisect(lo, hi):
        flo = f(lo)
        while hi - lo > 1e-12 * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        y = 0.5 * (lo + hi)
        for _ in range(3):  # Newton polish
            step = f(y) / df(y)
            if not math.isfinite(step):
                break
            y -= step
        return y

    # f(1) = -gamma < 0, f(e) = 1 - gamma e > 0, f -> -inf as y -> inf
    hi = math.e
    while f(hi) > 0:
        hi *= 2.0
    return (bisect(1.0, math.e), bisect(math.e, hi))


def classical_residual(sol: SeparatedSolution, grid: Grid, times) -> float:
    """max |u_t - rho_lam u u_xx| over (t, x) in the open positive set.

    Nodes whose neighbours leave the positive set are skipped, which keeps the
    sample at least one cell away from the kinks.
    """
    x = grid.nodes
    raw = sol._raw(x)
    pos = raw > 0
    keep = pos.copy()
    keep[1:] &= pos[:-1]
    keep[:-1] &= pos[1:]
    keep[0] = keep[-1] = False
    if not np.any(keep):
        return 0.0
    xs = x[keep]
    F = sol.F(xs)
    d2F = sol.d2F(xs)
    r = rho(sol.ctx, xs)
    worst = 0.0
    for t in np.atleast_1d(times):
        G = sol.G(t)
        res = sol.dG(t) * F - r * (G * F) * (G * d2F)
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def bc_saturation_gap(sol: SeparatedSolution, t, x):
    """u_t + u/t from the closed form; equals G F (1/t - mu G), zero iff 1/G(t0) = mu t0."""
    t = np.asarray(t, dtype=float)
    G = sol.G(t)
    return np.multiply.outer(np.atleast_1d(G * (1.0 / t - sol.mu * G)), np.atleast_1d(sol.F(x))).squeeze()


def lipschitz_sharpness_exhibit(sol: SeparatedSolution) -> dict:
    """One-sided slopes of F at the right end of its support (lam = 0 family).

    Slopes are d/dy in the scaled variable. For gamma = 0 the profile mu (log y)_+
    is unbounded; the record then carries the finite L^3(d nu_0) norm instead.
    """
    if sol.lam != 0:
        raise ArgumentError("the exhibit is defined for the lam = 0 family")
    mu, gamma = sol.mu, sol.gamma
    if gamma == 0:
        l3_cubed, _ = integrate.quad(lambda y: (mu * math.log(y)) ** 3 / y**2, 1.0, math.inf)
        return {
            "y_minus": 1.0,
            "y_plus": math.inf,
            "left_slope": 0.0,
            "right_slope": mu,
            "jump": mu,
            "sup_norm": math.inf,
            "unbounded": True,
            "l3_nu0_norm": l3_cubed ** (1.0 / 3.0),
            "l3_nu0_norm_cubed": l3_cubed,
        }
    pts = support_fixed_points(gamma)
    if pts is None:
        raise ArgumentError("gamma > 1/e gives an empty support")
    y_minus, y_plus = pts
    interior = mu * (1.0 / y_plus - gamma)
    y_peak = 1.0 / gamma
    return {
        "y_minus": y_minus,
        "y_plus": y_plus,
        "left_slope": interior,
        "right_slope": 0.0,
        "jump": abs(interior),
        "sup_norm": mu * max(math.log(y_peak) - 1.0, 0.0),
        "unbounded": False,
    }


def energy_norms(sol: SeparatedSolution) -> dict:
    """||F||_{L1(nu)}, ||F||_{L3(nu)}, ||F'||_{L2}, ||(F^2)'||_{L2} over the positive set."""
    lo, hi = sol.support()
    if not math.isfinite(lo):
        return {"l1_nu": 0.0, "l3_nu": 0.0, "grad_l2": 0.0, "grad_sq_l2": 0.0}
    ctx = sol.ctx
    lo = max(lo, 0.0)

    def q(fn):
        val, _ = integrate.quad(fn, lo, hi, limit=400)
        return val

    def w(x):
        return 1.0 / rho(ctx, x)

    l1 = q(lambda x: sol.F(x) * w(x))
    l3 = q(lambda x: sol.F(x) ** 3 * w(x)) ** (1.0 / 3.0)
    g2 = math.sqrt(q(lambda x: sol.dF(x) ** 2))
    gs2 = math.sqrt(q(lambda x: (2.0 * sol.F(x) * sol.dF(x)) ** 2))
    return {"l1_nu": l1, "l3_nu": l3, "grad_l2": g2, "grad_sq_l2": gs2}


def kink_holder_quotient(sol: SeparatedSolution, alpha: float, h: float, cells: int = 8) -> float:
    """Largest |F(x) - F(y)| / |x - y|^alpha over node pairs near the right support end.

    Nodes are x_* + j h, |j| <= cells, so the kink sits on a node for every h.
    """
    _, x_star = sol.support()
    if not math.isfinite(x_star):
        raise ArgumentError("no finite right support end")
    x = x_star + h * np.arange(-cells, cells + 1)
    f = sol.F(x)
    d = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(d, np.inf)
    return float(np.max(np.abs(f[:, None] - f[None, :]) / d**alpha))
