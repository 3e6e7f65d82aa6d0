"""Benilan-Crandall lower bounds du/dt >= -(u + 1/n)/K(t) and their discrete checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .grid import FieldSeries, time_derivative
from .weight import WeightContext, nu_quadrature_weights

SERIES_SWITCH = 1e-4


@dataclass(frozen=True)
class BCContext:
    theta: float = 0.0
    n: int | None = None

    def __post_init__(self):
        if not (self.theta >= 0 and math.isfinite(self.theta)):
            raise ArgumentError("theta must be finite and nonnegative")

    @property
    def shift(self) -> float:
        return 0.0 if self.n is None else 1.0 / self.n

    def K(self, t):
        return K_of_t(t, self.theta)


def K_of_t(t, theta: float = 0.0):
    """t for theta = 0, else (1 - exp(-theta t))/theta; strictly increasing from K(0+) = 0."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ArgumentError("K(t) needs t > 0")
    if theta < 0:
        raise ArgumentError("theta must be nonnegative")
    if theta == 0:
        out = t.copy()
    else:
        z = theta * t
        small = z < SERIES_SWITCH
        out = np.where(small, t * (1.0 - z / 2.0 + z * z / 6.0 - z**3 / 24.0), -np.expm1(-z) / theta)
    return out if out.ndim else float(out)


def time_rescale_s(t, theta: float):
    """s(t) = (1 - exp(-theta t))/theta, mapping [0, inf) onto [0, 1/theta)."""
    if not theta > 0:
        raise ArgumentError("time rescaling needs theta > 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ArgumentError("t must be nonnegative")
    out = -np.expm1(-theta * t) / theta
    return out if out.ndim else float(out)


def bc_residual(series: FieldSeries, bc: BCContext) -> FieldSeries:
    """r = du/dt + (u + 1/n)/K(t) on every snapshot, K evaluated at physical time."""
    if len(series) < 2:
        raise ArgumentError("the residual needs at least two snapshots")
    t = series.physical_times
    start = 1 if t[0] <= 0 else 0
    dudt = time_derivative(series).values
    r = np.full(series.values.shape, np.inf)
    # K is singular at t = 0, where the bound is vacuous
    K = np.asarray(K_of_t(t[start:], bc.theta))
    r[start:] = dudt[start:] + (series.values[start:] + bc.shift) / K[:, None]
    return series.with_values(r)


def interior_mask(series: FieldSeries, window=None) -> np.ndarray:
    """Interior (time, node) points: drop first and last snapshots and both endpoints.

    ``window = (t_lo, t_hi, x_lo, x_hi)`` in physical time restricts further.
    """
    nt, nx = series.values.shape
    m = np.zeros((nt, nx), dtype=bool)
    m[1:-1, 1:-1] = True
    if window is not None:
        t_lo, t_hi, x_lo, x_hi = window
        t = series.physical_times
        x = series.grid.nodes
        m &= ((t >= t_lo) & (t <= t_hi))[:, None] & ((x >= x_lo) & (x <= x_hi))[None, :]
    return m


def bc_tol(series: FieldSeries, mask=None) -> float:
    """max(10 dt, 10 h) times the sup of u over the checked points."""
    dt = float(np.max(np.diff(series.times))) if len(series) > 1 else 0.0
    h = series.grid.h_max
    mask = interior_mask(series) if mask is None else mask
    scale = float(np.max(np.abs(series.values[mask]), initial=0.0))
    return max(10.0 * dt, 10.0 * h) * scale


@dataclass(frozen=True)
class BCAudit:
    min_residual: float
    t_at_min: float
    x_at_min: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.min_residual >= -self.tol

    def to_dict(self) -> dict:
        return {"min_residual": self.min_residual, "t_at_min": self.t_at_min, "x_at_min": self.x_at_min,
                "bc_tol": self.tol, "pass": self.passed}


def audit_bc(series: FieldSeries, bc: BCContext, window=None) -> BCAudit:
    """Minimum interior residual and its location, with the default tolerance."""
    r = bc_residual(series, bc).values
    mask = interior_mask(series, window)
    if not mask.any():
        raise ArgumentError("no interior points to check")
    masked = np.where(mask, r, np.inf)
    k, i = np.unravel_index(int(np.argmin(masked)), masked.shape)
    return BCAudit(float(masked[k, i]), float(series.physical_times[k]), float(series.grid.nodes[i]),
                   bc_tol(series, mask))


def bc_distributional_check(series: FieldSeries, test_fns, ctx: WeightContext, bc: BCContext) -> list[float]:
    """Integral of r * phi d nu dt for each nonnegative phi.

    Each phi is called as ``phi(t, x)`` on the (series time, node) mesh, with t
    measured from the first snapshot, and must vanish on the mesh boundary.
    """
    r = bc_residual(series, bc).values
    w = nu_quadrature_weights(ctx, series.grid)
    t = series.times
    x = series.grid.nodes
    out = []
    for phi in test_fns:
        P = np.asarray(phi(t, x), dtype=float)
        if np.any(P < 0):
            raise ArgumentError("test functions must be nonnegative")
        if np.any(P[0] != 0) or np.any(P[-1] != 0) or np.any(P[:, [0, -1]] != 0):
            raise ArgumentError("test functions must be supported in the interior")
        inner = np.where(P > 0, r * P, 0.0) @ w
        out.append(float(np.trapezoid(inner, t)))
    return out


def distributional_tol(series: FieldSeries, phi, ctx: WeightContext) -> float:
    """bc_tol times ||phi||_{L1(dt x d nu)}."""
    P = np.abs(np.asarray(phi(series.times, series.grid.nodes), dtype=float))
    w = nu_quadrature_weights(ctx, series.grid)
    return bc_tol(series) * float(np.trapezoid(P @ w, series.times))
