"""Weighted norms, truncations, and the parabolic Hölder seminorm."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .grid import Field, FieldSeries, gradient_values
from .weight import WeightContext, nu_quadrature_weights

DEFAULT_PAIR_BUDGET = 1_000_000
DEFAULT_SEED = 20240611


@dataclass(frozen=True)
class NormKind:
    """Tag for a norm family and its parameter (p, delta, or alpha)."""

    tag: str
    param: float | None = None

    _TAGS = ("Lp_nu", "Lp_dx", "GradL2", "Vp", "QuasiLdelta", "ParabolicHolder")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ArgumentError(f"unknown norm tag {self.tag!r}")
        v = self.param
        if self.tag in ("Lp_nu", "Lp_dx", "Vp") and not (v is not None and v > 0):
            raise ArgumentError("p must be positive")
        if self.tag == "QuasiLdelta" and not (v is not None and 0 < v < 1):
            raise ArgumentError("delta must lie in (0, 1)")
        if self.tag == "ParabolicHolder" and not (v is not None and 0 < v <= 1):
            raise ArgumentError("alpha must lie in (0, 1]")

    def __call__(self, f: Field, ctx: WeightContext | None = None) -> float:
        ctx = ctx or WeightContext()
        if self.tag in ("Lp_nu", "QuasiLdelta"):
            return lp_nu(f, self.param, ctx)
        if self.tag == "Lp_dx":
            return lp_dx(f, self.param)
        if self.tag == "GradL2":
            return grad_l2(f)
        if self.tag == "Vp":
            return vp(f, self.param, ctx)
        raise ArgumentError("the parabolic seminorm acts on a FieldSeries")


def _check_p(p):
    if not p > 0:
        raise ArgumentError("p must be positive")


def lp_nu_power(values, p: float, weights) -> np.ndarray | float:
    """sum_i w_i |f_i|^p along the last axis."""
    _check_p(p)
    return np.abs(values) ** p @ weights


def lp_nu(f: Field, p: float, ctx: WeightContext) -> float:
    """(sum w_i |f_i|^p)^(1/p) with exact nu-cell weights; a quasi-norm for p < 1."""
    w = nu_quadrature_weights(ctx, f.grid)
    return float(lp_nu_power(f.values, p, w) ** (1.0 / p))


def lp_dx(f: Field, p: float) -> float:
    _check_p(p)
    return float((np.abs(f.values) ** p @ f.grid.trapezoid_weights()) ** (1.0 / p))


def grad_l2_sq_values(values, grid) -> np.ndarray | float:
    """Trapezoid integral of |f_x|^2 along the last axis."""
    g = gradient_values(values, grid)
    return g**2 @ grid.trapezoid_weights()


def grad_l2(f: Field) -> float:
    return float(np.sqrt(grad_l2_sq_values(f.values, f.grid)))


def vp(f: Field, p: float, ctx: WeightContext) -> float:
    """||f||_{L^p(d nu)} + ||f_x||_{L^2(dx)}."""
    return lp_nu(f, p, ctx) + grad_l2(f)


def trapezoid_time(values, times) -> float:
    """Time integral of per-snapshot quantities; zero for a single snapshot."""
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        return 0.0
    return float(np.trapezoid(np.asarray(values, dtype=float), times))


def spacetime_lp_nu(series: FieldSeries, p: float, ctx: WeightContext) -> float:
    """L^p(Q_T; dt x d nu) via trapezoid in time of the spatial p-th powers."""
    w = nu_quadrature_weights(ctx, series.grid)
    return trapezoid_time(lp_nu_power(series.values, p, w), series.times) ** (1.0 / p)


def spacetime_grad_l2_sq(series: FieldSeries) -> float:
    return trapezoid_time(grad_l2_sq_values(series.values, series.grid), series.times)


# -- truncations


def _check_k(k):
    if not k >= 1:
        raise ArgumentError("truncation level k must be >= 1")


def truncate_values(values, k: float):
    _check_k(k)
    return np.clip(values, 1.0 / k, k)


def truncate(f: Field, k: float) -> Field:
    """T_k(f): f clipped to [1/k, k]."""
    return f.with_values(truncate_values(f.values, k))


def complement(f: Field, k: float) -> Field:
    """G_k(f) = f - T_k(f)."""
    return f.with_values(f.values - truncate_values(f.values, k))


# -- parabolic Hölder seminorm


def _pair_quotients(t, x, v, ia, ib, alpha):
    ta, xa = np.divmod(ia, x.size)
    tb, xb = np.divmod(ib, x.size)
    den = np.abs(t[ta] - t[tb]) ** (alpha / 2.0) + np.abs(x[xa] - x[xb]) ** alpha
    num = np.abs(v[ia] - v[ib])
    ok = den > 0
    return float(np.max(num[ok] / den[ok], initial=0.0))


def parabolic_holder_seminorm(series: FieldSeries, alpha: float, sample_budget: int = DEFAULT_PAIR_BUDGET,
                              seed: int = DEFAULT_SEED) -> float:
    """max |f(t,x) - f(s,y)| / (|t-s|^(alpha/2) + |x-y|^alpha) over grid pairs.

    Exhaustive when the pair count fits the budget; otherwise a reproducible
    random sample stratified by the first point, always including every
    nearest-neighbour pair in space and time. The result is a lower bound.
    """
    if not 0 < alpha <= 1:
        raise ArgumentError("alpha must lie in (0, 1]")
    t = series.physical_times
    x = series.grid.nodes
    v = series.values.ravel()
    npts = v.size
    if npts < 2:
        return 0.0
    pairs = npts * (npts - 1) // 2
    best = 0.0
    if pairs <= sample_budget:
        chunk = max(1, sample_budget // npts)
        for start in range(0, npts, chunk):
            ia = np.arange(start, min(start + chunk, npts))
            a, b = np.meshgrid(ia, np.arange(npts), indexing="ij")
            keep = b > a
            best = max(best, _pair_quotients(t, x, v, a[keep], b[keep], alpha))
        return best
    # neighbours
    idx = np.arange(npts).reshape(t.size, x.size)
    best = _pair_quotients(t, x, v, idx[:, :-1].ravel(), idx[:, 1:].ravel(), alpha)
    if t.size > 1:
        best = max(best, _pair_quotients(t, x, v, idx[:-1].ravel(), idx[1:].ravel(), alpha))
    rng = np.random.default_rng(seed)
    per = max(1, (sample_budget - npts) // npts)
    ia = np.repeat(np.arange(npts), per)
    ib = rng.integers(0, npts, size=ia.size)
    return max(best, _pair_quotients(t, x, v, ia, ib, alpha))
