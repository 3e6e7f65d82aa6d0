"""The n-th regularized Dirichlet problem and its semi-implicit finite-difference solve.

    u_t = rho (u + 1/n) u_xx + rho g_n (u + 1/n)   on (a_n, b_n),
    u(t, a_n) = u(t, b_n) = 0.

One step freezes the diffusion coefficient at the old level and treats the
diffusion and reaction implicitly, giving a tridiagonal M-matrix whenever
dt * max(rho g_n) < 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.linalg import solve_banded

from .catalog import Profile, bump, make_rho_g0, make_u0, smooth_step
from .errors import ArgumentError, DataError, PositivityViolation, StepError
from .grid import Field, FieldSeries, Grid, gradient_values, laplacian_coefficients, make_graded_grid
from .weight import WeightContext, nu_interval, nu_quadrature_weights, rho

logger = logging.getLogger(__name__)

CLAMP_BUDGET = 1e-6
POSITIVITY_REL_TOL = 1e-10


@dataclass(frozen=True)
class ProblemSpec:
    """Continuum data: lam, final time T, u0 >= 0 and the product rho_lam * g0 >= -theta."""

    lam: float
    T: float
    u0: Profile
    rho_g0: Profile
    theta: float | None = None

    def __post_init__(self):
        if self.lam < 0:
            raise ArgumentError("lambda must be nonnegative")
        if not (0 < self.T < math.inf):
            raise ArgumentError("T must be positive and finite")
        if self.u0.inf < 0:
            raise DataError("u0 must be nonnegative")
        lower = max(0.0, -self.rho_g0.inf)
        if self.theta is None:
            object.__setattr__(self, "theta", lower)
        elif self.theta < lower:
            raise DataError(f"theta={self.theta} is below -inf(rho g0) = {lower}")

    @property
    def ctx(self) -> WeightContext:
        return WeightContext(self.lam)

    @property
    def g_inf(self) -> float:
        """||g0 rho_lam||_inf."""
        return self.rho_g0.sup_abs

    @classmethod
    def from_catalog(cls, lam, T, u0, rho_g0=("zero", {}), theta=None) -> "ProblemSpec":
        u0_name, u0_params = u0
        g_name, g_params = rho_g0
        return cls(lam, T, make_u0(u0_name, **u0_params), make_rho_g0(g_name, **g_params), theta)

    def u0_power_norm(self, p: float) -> float:
        """||u0||^p_{L^p(d nu_lam)} by adaptive quadrature over the support of u0."""
        lo, hi = self.u0.support
        if self.u0.sup == 0:
            return 0.0
        ctx = self.ctx
        lo = max(lo, 0.0)
        val, _ = integrate.quad(
            lambda x: self.u0(np.array([x]))[0] ** p / rho(ctx, x) if x > 0 else 0.0,
            lo, hi, limit=400, epsabs=1e-13, epsrel=1e-11,
        )
        return float(val)


@dataclass(frozen=True, eq=False)
class RegularizedInstance:
    """Discrete n-th problem: grid on (a_n, b_n), mollified u0 and rho_lam g_n on the grid.

    ``n = None`` drops the 1/n shift and is used for direct (manufactured) runs.
    """

    n: int | None
    grid: Grid
    u0n: Field
    rho_gn: Field
    lam: float = 0.0

    @property
    def a_n(self) -> float:
        return self.grid.a

    @property
    def b_n(self) -> float:
        return self.grid.b

    @property
    def shift(self) -> float:
        return 0.0 if self.n is None else 1.0 / self.n

    @property
    def ctx(self) -> WeightContext:
        return WeightContext(self.lam)

    @property
    def gn_inf(self) -> float:
        return float(np.max(np.abs(self.rho_gn.values)))

    @property
    def C_inf(self) -> float:
        """||u0n||_inf exp(T ||rho g_n||_inf) per unit time exponent; see ``c_infinity``."""
        return float(np.max(self.u0n.values))

    def c_infinity(self, T: float) -> float:
        return float(np.max(self.u0n.values)) * math.exp(T * self.gn_inf)

    @classmethod
    def direct(cls, grid: Grid, u0_values, rho_g=None, lam: float = 0.0, n=None):
        u0 = np.array(u0_values, dtype=float)
        u0[0] = u0[-1] = 0.0
        rg = np.zeros(len(grid)) if rho_g is None else np.asarray(rho_g, dtype=float)
        return cls(n, grid, Field(grid, u0), Field(grid, rg), lam)


def truncation_schedule(lam: float, n: int) -> tuple[float, float]:
    """(a_n, b_n): (n^{-1/2}, n) for lam = 0, (1/n, n) for lam > 0."""
    if int(n) != n or n < 2:
        raise ArgumentError("the truncation schedule needs an integer n >= 2")
    if lam == 0:
        return (1.0 / math.sqrt(n), float(n))
    return (1.0 / n, float(n))


def schedule_defect(lam: float, n: int) -> float:
    """(1/n) nu_lam((a_n, b_n)), which must vanish along the schedule."""
    a, b = truncation_schedule(lam, n)
    return nu_interval(WeightContext(lam), a, b) / n


def mollifier_radius(lam: float, n: int) -> float:
    a, _ = truncation_schedule(lam, n)
    return min(a / 2.0, 1.0 / n)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_BUMP_MASS = float(integrate.quad(lambda s: bump(np.array([s]), 0.0, 1.0)[0], -1.0, 1.0, epsabs=1e-15)[0])


def _cutoff(x, a, b, r):
    """1 on [a + 3r, b - 3r], 0 outside (a + 2r, b - 2r)."""
    return smooth_step((x - a - 2 * r) / r) * smooth_step((b - 2 * r - x) / r)


def mollified_profile(profile: Profile, a: float, b: float, r: float):
    """x -> ((cutoff * profile) * eta_r)(x), vectorized, by 32-point Gauss-Legendre."""

    def f(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        s = _GL_NODES  # bump variable in (-1, 1)
        y = x[:, None] - r * s[None, :]
        kernel = bump(s, 0.0, 1.0) / _BUMP_MASS
        vals = np.zeros_like(y)
        ok = y > 0
        vals[ok] = profile(y[ok]) * _cutoff(y[ok], a, b, r)
        out = (vals * kernel[None, :]) @ _GL_WEIGHTS
        out = np.maximum(out, 0.0)
        out[(x <= a + r) | (x >= b - r)] = 0.0
        return out

    return f


def mollify_data(spec: ProblemSpec, n: int, grid: Grid) -> RegularizedInstance:
    """Mollified, compactly supported u_{0,n} and cut-off rho_lam g_n on ``grid``."""
    a, b = truncation_schedule(spec.lam, n)
    if not (math.isclose(grid.a, a, rel_tol=1e-12) and math.isclose(grid.b, b, rel_tol=1e-12)):
        raise ArgumentError(f"grid must span (a_n, b_n) = ({a}, {b})")
    if spec.u0.inf < 0:
        raise DataError("u0 must be nonnegative")
    r = mollifier_radius(spec.lam, n)
    x = grid.nodes
    u0n = mollified_profile(spec.u0, a, b, r)(x)
    cut = _cutoff(x, a, b, r)
    rho_gn = cut * spec.rho_g0(x)
    return RegularizedInstance(n, grid, Field(grid, u0n), Field(grid, rho_gn), spec.lam)


def _positivity_tol(inst: RegularizedInstance) -> float:
    return POSITIVITY_REL_TOL * float(np.max(np.abs(inst.u0n.values)))


def step(state: Field, t: float, dt: float, inst: RegularizedInstance, ctx: WeightContext,
         positivity_tol: float | None = None, stats: dict | None = None) -> Field:
    """Advance one semi-implicit step; tiny undershoots are clamped to 0 and counted in ``stats``."""
    tol = _positivity_tol(inst) if positivity_tol is None else positivity_tol
    u = state.values
    if np.min(u) < -tol:
        raise ArgumentError("state violates positivity before the step")
    rg = inst.rho_gn.values
    if dt * np.max(rg, initial=0.0) >= 1.0:
        raise ArgumentError("dt * max(rho g_n) must be < 1")
    grid = state.grid
    x = grid.nodes
    shift = inst.shift
    lo, up = laplacian_coefficients(grid)
    coef = dt * rho(ctx, x[1:-1]) * (u[1:-1] + shift)
    n = x.size
    ab = np.zeros((3, n))
    ab[1, 0] = ab[1, -1] = 1.0
    ab[1, 1:-1] = 1.0 + coef * (lo + up) - dt * rg[1:-1]
    ab[0, 2:] = -coef * up  # super-diagonal entry (i, i+1) stored at column i+1
    ab[2, :-2] = -coef * lo  # sub-diagonal entry (i, i-1) stored at column i-1
    rhs = np.zeros(n)
    rhs[1:-1] = u[1:-1] + dt * rg[1:-1] * shift
    try:
        new = solve_banded((1, 1), ab, rhs, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise StepError(f"tridiagonal solve failed at t={t}: {exc}") from exc
    if not np.all(np.isfinite(new)):
        raise StepError(f"non-finite values after step at t={t}")
    i = int(np.argmin(new))
    if new[i] < -tol:
        raise PositivityViolation(
            f"undershoot {new[i]:.3e} at x={x[i]:.6g} (t={t + dt:.6g})", index=i, x=float(x[i]), value=float(new[i])
        )
    neg = new < 0
    if np.any(neg):
        if stats is not None:
            w = stats.setdefault("_weights", nu_quadrature_weights(ctx, grid))
            stats["clamp_count"] = stats.get("clamp_count", 0) + int(neg.sum())
            stats["clamped_mass"] = stats.get("clamped_mass", 0.0) + float(np.sum(w[neg] * -new[neg]))
        new[neg] = 0.0
    return Field(grid, new)


def integrate_instance(inst: RegularizedInstance, T: float, dt: float, *, t0: float = 0.0,
                       save_every: int = 1, positivity_tol: float | None = None) -> FieldSeries:
    """March the instance from its initial data over a time span T.

    Snapshots are kept every ``save_every`` steps (and at the end). The returned
    series' ``meta`` carries the running maximum, C_inf, and clamp counters.
    """
    nsteps = int(round(T / dt))
    if nsteps < 1 or abs(nsteps * dt - T) > 1e-9 * max(T, 1.0):
        raise ArgumentError(f"dt={dt} must divide T={T}")
    ctx = inst.ctx
    grid = inst.grid
    u = inst.u0n
    w = nu_quadrature_weights(ctx, grid)
    mass0 = float(np.sum(w * u.values))
    stats = {"clamp_count": 0, "clamped_mass": 0.0, "_weights": w}
    times = [0.0]
    snaps = [u.values]
    running_max = float(np.max(u.values))
    for m in range(nsteps):
        t = t0 + m * dt
        try:
            u = step(u, t, dt, inst, ctx, positivity_tol, stats)
        except (PositivityViolation, StepError) as exc:
            exc.partial = FieldSeries(grid, np.array(times), np.array(snaps), t0,
                                      {"aborted_at": t, "steps": m})
            raise
        running_max = max(running_max, float(np.max(u.values)))
        if (m + 1) % save_every == 0 or m + 1 == nsteps:
            times.append((m + 1) * dt)
            snaps.append(u.values)
    c_inf = inst.c_infinity(T)
    budget = CLAMP_BUDGET * mass0
    if stats["clamped_mass"] > budget and stats["clamped_mass"] > 0:
        exc = PositivityViolation(
            f"cumulative clamped mass {stats['clamped_mass']:.3e} exceeds budget {budget:.3e}"
        )
        exc.partial = FieldSeries(grid, np.array(times), np.array(snaps), t0)
        raise exc
    meta = {
        "n": inst.n,
        "lam": inst.lam,
        "dt": dt,
        "steps": nsteps,
        "nodes": len(grid),
        "h_max": grid.h_max,
        "running_max": running_max,
        "C_inf": c_inf,
        "C_inf_margin": c_inf - running_max,
        "clamp_count": stats["clamp_count"],
        "clamped_mass": stats["clamped_mass"],
        "initial_nu_mass": mass0,
    }
    return FieldSeries(grid, np.array(times), np.array(snaps), t0, meta)


@dataclass(frozen=True)
class GridParams:
    count: int = 400
    grading: float = 1.0


def solve(spec: ProblemSpec, n: int, grid_params: GridParams | tuple = GridParams(), dt: float = 1e-3,
          *, save_every: int = 1, positivity_tol: float | None = None) -> FieldSeries:
    """Build the n-th instance on its schedule domain and integrate it to T."""
    if isinstance(grid_params, tuple):
        grid_params = GridParams(*grid_params)
    a, b = truncation_schedule(spec.lam, n)
    grid = make_graded_grid(a, b, grid_params.count, grid_params.grading)
    inst = mollify_data(spec, n, grid)
    series = integrate_instance(inst, spec.T, dt, save_every=save_every, positivity_tol=positivity_tol)
    series.meta["instance"] = inst
    return series


# -- weak form -----------------------------------------------------------------


@dataclass(frozen=True)
class BumpTestFunction:
    """phi(t, x) = bump(x; xc, xw) * bump(t; tc, tw), with closed-form derivatives."""

    xc: float
    xw: float
    tc: float
    tw: float

    @staticmethod
    def _b(z, c, w):
        r = (np.asarray(z, dtype=float) - c) / w
        val = np.zeros_like(r)
        der = np.zeros_like(r)
        m = np.abs(r) < 1
        q = 1.0 - r[m] ** 2
        val[m] = np.exp(1.0 - 1.0 / q)
        der[m] = val[m] * (-2.0 * r[m] / q**2) / w
        return val, der

    def parts(self, t, x):
        bt, dbt = self._b(t, self.tc, self.tw)
        bx, dbx = self._b(x, self.xc, self.xw)
        return np.outer(bt, bx), np.outer(dbt, bx), np.outer(bt, dbx)

    def __call__(self, t, x):
        return self.parts(t, x)[0]


def _trapezoid_time(values, times):
    if times.size == 1:
        return 0.0
    return float(np.trapezoid(values, times))


def weak_residual(series: FieldSeries, phi, ctx: WeightContext, rho_g0=None, u0=None) -> float:
    """Discrete LHS - RHS of the weak formulation tested against phi.

    phi must provide ``parts(t, x) -> (phi, phi_t, phi_x)`` on the (time, node)
    mesh, with t measured from the start of the series. ``rho_g0`` is an array
    of rho_lam g0 on the grid; ``u0`` defaults to the first snapshot.
    """
    x = series.grid.nodes
    t = series.times
    P, Pt, Px = phi.parts(t, x)
    scale = max(float(np.max(np.abs(P))), 1e-300)
    if np.any(np.abs(P[:, [0, -1]]) > 1e-14 * scale) or np.any(np.abs(P[-1]) > 1e-14 * scale):
        raise ArgumentError("test function must vanish on the spatial boundary and at the final time")
    u = series.values
    ux = gradient_values(u, series.grid)
    wnu = nu_quadrature_weights(ctx, series.grid)
    wdx = series.grid.trapezoid_weights()
    rg = np.zeros_like(x) if rho_g0 is None else np.asarray(rho_g0, dtype=float)
    u_init = u[0] if u0 is None else np.asarray(u0, dtype=float)

    a = -(u * Pt) @ wnu
    b = (u * ux * Px) @ wdx
    c = (ux**2 * P) @ wdx
    e = (P * u * rg[None, :]) @ wnu
    d = float(np.sum(u_init * P[0] * wnu))
    return _trapezoid_time(a + b + c - e, t) - d
