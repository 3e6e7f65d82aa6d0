"""Degeneracy weight rho_lam, the measure d nu_lam = dx / rho_lam, and nu-quadrature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DivergenceError, DomainError


@dataclass(frozen=True)
class WeightContext:
    """The one-parameter weight family indexed by ``lam >= 0``."""

    lam: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ArgumentError(f"lambda must be finite and nonnegative, got {self.lam}")

    def rho(self, x):
        return rho(self, x)

    def nu_density(self, x):
        return 1.0 / rho(self, x)

    def nu_interval(self, a, b):
        return nu_interval(self, a, b)

    @property
    def nu_total(self) -> float:
        """nu_lam((0, inf)); infinite for lam = 0."""
        if self.lam == 0:
            return np.inf
        return np.pi / (2.0 * self.lam)


def rho(ctx: WeightContext, x):
    """x^(1/2) (x + lam) (x + 2 lam)^(1/2); exactly x**2 when lam = 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("rho is defined for x > 0 only")
    lam = ctx.lam
    if lam == 0:
        out = x * x
    else:
        out = np.sqrt(x * (x + 2.0 * lam)) * (x + lam)
    return out if out.ndim else float(out)


def _root(x, lam):
    # sqrt((x + lam)^2 - lam^2) without cancellation
    return np.sqrt(x * (x + 2.0 * lam))


def _atan_over(z):
    """arctan(z) / z, with the z -> 0 limit."""
    z = np.asarray(z, dtype=float)
    small = z < 1e-8
    return np.where(small, 1.0 - z * z / 3.0, np.arctan(z) / np.where(small, 1.0, z))


def nu_interval(ctx: WeightContext, a, b):
    """Exact nu_lam((a, b)) for 0 <= a < b <= inf.

    lam = 0 gives 1/a - 1/b; lam > 0 gives a difference of arcsec((x + lam)/lam)
    values, evaluated through arctan of sqrt(x (x + 2 lam)) / lam, which has no
    cancellation near x = 0. Works elementwise on arrays.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(np.isnan(a)) or np.any(np.isnan(b)):
        raise DomainError("interval endpoints must be nonnegative numbers")
    if np.any(~(a < b)):
        raise ArgumentError("nu_interval needs a < b")
    lam = ctx.lam
    if lam == 0:
        if np.any(a == 0):
            raise DivergenceError("nu_0 is not finite near 0")
        finite = np.isfinite(b)
        bf = np.where(finite, b, 1.0)
        out = np.where(finite, (bf - a) / (a * bf), 1.0 / a)
    else:
        ra = _root(a, lam)
        finite = np.isfinite(b)
        bf = np.where(finite, b, 1.0)
        rb = _root(bf, lam)
        # arctan(A) - arctan(B) = arctan(z), z = (A - B) / (1 + A B) = lam * ratio;
        # dividing by lam is folded into ratio so tiny lam neither overflows nor cancels
        ratio = (bf - a) * (bf + a + 2.0 * lam) / ((ra + rb) * (lam * lam + ra * rb))
        diff_finite = ratio * _atan_over(lam * ratio)
        # arcsec(inf) - arcsec(z_a) = arctan(lam / r_a)
        with np.errstate(divide="ignore"):
            inv = np.where(ra > 0, 1.0 / np.where(ra > 0, ra, 1.0), np.inf)
        diff_inf = np.where(ra > 0, inv * _atan_over(lam * np.where(ra > 0, inv, 0.0)), 0.5 * np.pi / lam)
        out = np.where(finite, diff_finite, diff_inf)
    return out if out.ndim else float(out)


def nu_quadrature_weights(ctx: WeightContext, grid) -> np.ndarray:
    """Exact nu-mass of the cell around each node (midpoint cells, half cells at the ends).

    ``sum(w * f)`` approximates the integral of f against d nu_lam over
    [x_0, x_M] with second-order accuracy; constants integrate exactly.
    """
    x = np.asarray(getattr(grid, "nodes", grid), dtype=float)
    if x[0] <= 0:
        raise DomainError("quadrature grid must lie strictly inside (0, inf)")
    edges = np.empty(x.size + 1)
    edges[0] = x[0]
    edges[-1] = x[-1]
    edges[1:-1] = 0.5 * (x[:-1] + x[1:])
    return nu_interval(ctx, edges[:-1], edges[1:])
