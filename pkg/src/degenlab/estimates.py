"""Explicit a priori constants and audits of the corresponding inequalities on solver output."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .benilan_crandall import K_of_t
from .errors import ArgumentError
from .grid import FieldSeries, gradient_values, time_derivative
from .norms import grad_l2_sq_values, lp_nu_power, trapezoid_time
from .solver import ProblemSpec
from .weight import WeightContext, nu_quadrature_weights, rho

AUDIT_TOL = 0.05
KAPPA = 1.0


@dataclass(frozen=True)
class EstimateReport:
    name: str
    lhs: float
    rhs: float
    audit_tol: float = AUDIT_TOL
    details: dict = field(default_factory=dict, compare=False)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -abs(self.rhs) * self.audit_tol

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin,
                "pass": self.passed, **self.details}


@dataclass(frozen=True)
class InteriorWindow:
    """Cylinder (t0, T) x [d_minus, d_plus] in physical time."""

    t0: float
    d_minus: float
    d_plus: float

    def __post_init__(self):
        if not self.t0 > 0:
            raise ArgumentError("t0 must be positive")
        if not self.d_minus > 0:
            raise ArgumentError("D must stay away from x = 0")
        if not self.d_plus > self.d_minus:
            raise ArgumentError("D must be a nondegenerate interval")

    @property
    def d(self) -> float:
        """Distance from D to the boundary point 0."""
        return self.d_minus


# -- constants


def _nonneg(*vals):
    for v in vals:
        if not (v >= 0 and math.isfinite(v)):
            raise ArgumentError("constants need finite nonnegative inputs")


def constant_C_m1(m: int, T: float, u0_norm: float, g_inf: float) -> float:
    """C_{m+1} = ||u0||^{m+1} (T g exp(T g) + 1); ``u0_norm`` is already the (m+1)-th power."""
    if m not in (0, 1, 2):
        raise ArgumentError("m must be 0, 1 or 2")
    _nonneg(T, u0_norm, g_inf)
    return u0_norm * (T * g_inf * math.exp(T * g_inf) + 1.0)


def constant_C_delta(delta: float, T: float, u0_delta: float, g_inf: float) -> float:
    if not 0 < delta < 1:
        raise ArgumentError("delta must lie in (0, 1)")
    _nonneg(T, u0_delta, g_inf)
    a = T * delta * g_inf
    return (a * math.exp(a) + 1.0) * u0_delta


def constant_C_prime(C0: float, g_inf: float) -> float:
    return C0 * g_inf / 2.0


def constant_C_prime_proof(C1: float, T: float, g_inf: float) -> float:
    """The bound the test-function argument actually delivers with xi(t) = t."""
    return C1 / 2.0 + T * g_inf * C1


def omega_allowance(n: int | None, kappa: float = KAPPA) -> float:
    """kappa n^{-1/2}; zero for direct runs without regularization index."""
    if n is None:
        return 0.0
    return kappa / math.sqrt(n)


def semiconvex_sup_bound(l1_mass: float, R: float, N: float, d_dim: int = 1) -> float:
    """||g||_{L1(B_2R)}/(omega_d R^d) + N R^2/(2 d), omega_d the unit-ball volume."""
    if not R > 0:
        raise ArgumentError("R must be positive")
    omega_d = math.pi ** (d_dim / 2) / math.gamma(d_dim / 2 + 1)
    return l1_mass / (omega_d * R**d_dim) + N / (2.0 * d_dim) * R**2


def semiconvex_lip_bound(M: float, delta: float, N: float) -> float:
    if not delta > 0:
        raise ArgumentError("delta must be positive")
    return 2.0 * M / delta + delta * N / 2.0


# -- helpers


def _n_of(series: FieldSeries, n):
    return series.meta.get("n") if n is None else n


def _shift(n):
    return 0.0 if n is None else 1.0 / n


def _nonneg_values(series):
    return np.maximum(series.values, 0.0)


# -- audits


def audit_lp(series: FieldSeries, m: int, spec: ProblemSpec, ctx: WeightContext, *, n=None,
             kappa: float = KAPPA, audit_tol: float = AUDIT_TOL) -> EstimateReport:
    """sup_t ||u||^{m+1}_{L^{m+1}(nu)} + ||grad u^{m/2+1}||^2_{L2(Q_T)} <= C_{m+1} + omega(n).

    ``details['running_lhs']`` is sup_t of the norm at t plus the gradient integral up to t.
    """
    n = _n_of(series, n)
    p = m + 1
    u = _nonneg_values(series)
    w = nu_quadrature_weights(ctx, series.grid)
    power = lp_nu_power(u, p, w)
    g = grad_l2_sq_values(u ** (m / 2.0 + 1.0), series.grid)
    t = series.times
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(t))])
    lhs = float(np.max(power)) + float(cum[-1])
    C = constant_C_m1(m, spec.T, spec.u0_power_norm(p), spec.g_inf)
    allow = omega_allowance(n, kappa)
    return EstimateReport(f"lp_apriori_m{m}", lhs, C + allow, audit_tol,
                          {"constant": C, "allowance": allow, "running_lhs": float(np.max(power + cum))})


def audit_delta(series: FieldSeries, delta: float, spec: ProblemSpec, ctx: WeightContext, *, n=None,
                kappa: float = KAPPA, audit_tol: float = AUDIT_TOL) -> tuple[EstimateReport, EstimateReport]:
    """The shifted delta estimate and its unshifted consequence (both against C_delta + omega(n))."""
    if not 0 < delta < 1:
        raise ArgumentError("delta must lie in (0, 1)")
    n = _n_of(series, n)
    beta = 1.0 - delta
    u = _nonneg_values(series)
    v = u + _shift(n)
    w = nu_quadrature_weights(ctx, series.grid)
    sup_shift = float(np.max(lp_nu_power(v, delta, w)))
    sup_plain = float(np.max(lp_nu_power(u, delta, w)))
    expo = 1.0 - beta / 2.0
    grad = trapezoid_time(grad_l2_sq_values(v**expo, series.grid), series.times)
    coef = delta**2 / expo**2
    C = constant_C_delta(delta, spec.T, spec.u0_power_norm(delta), spec.g_inf)
    allow = omega_allowance(n, kappa)
    det = {"constant": C, "allowance": allow, "delta": delta}
    with_shift = EstimateReport(f"delta_apriori_d{delta:g}", sup_shift + coef * grad, C + allow, audit_tol,
                                {**det, "sup_term": sup_shift, "gradient_term": coef * grad})
    plain = EstimateReport(f"second_delta_apriori_d{delta:g}", sup_plain, C + allow, audit_tol, dict(det))
    return with_shift, plain


def audit_time_weighted(series: FieldSeries, spec: ProblemSpec, ctx: WeightContext, *, n=None,
                        kappa: float = KAPPA, audit_tol: float = AUDIT_TOL) -> tuple[EstimateReport, EstimateReport]:
    """4 ||t d_t (u + 1/n)^{1/2}||^2_{L2(dt x d nu)} + (T/2) ||grad u(T)||^2 against C' + omega(n).

    The first report uses C' = C1 ||g0 rho||/2; the second keeps the same lhs
    with the time weight t (not t^2) against C1/2 + T ||g0 rho|| C1.
    """
    n = _n_of(series, n)
    u = _nonneg_values(series)
    w = nu_quadrature_weights(ctx, series.grid)
    root = series.with_values(np.sqrt(u + _shift(n)))
    dt_root = time_derivative(root).values
    tp = series.times  # weights count time from the initial data
    T = float(tp[-1])
    sq = (dt_root**2) @ w
    first = 4.0 * trapezoid_time(tp**2 * sq, series.times)
    first_proof = 4.0 * trapezoid_time(tp * sq, series.times)
    last = 0.5 * T * float(grad_l2_sq_values(u[-1], series.grid))
    C1 = constant_C_m1(0, spec.T, spec.u0_power_norm(1.0), spec.g_inf)
    C = constant_C_prime(C1, spec.g_inf)
    Cp = constant_C_prime_proof(C1, spec.T, spec.g_inf)
    allow = omega_allowance(n, kappa)
    stated = EstimateReport("l2_time_apriori", first + last, C + allow, audit_tol,
                            {"constant": C, "allowance": allow, "time_term": first, "final_gradient_term": last})
    proof = EstimateReport("l2_time_apriori_proof_constant", first_proof + last, Cp + allow, audit_tol,
                           {"constant": Cp, "allowance": allow, "time_term": first_proof,
                            "final_gradient_term": last})
    return stated, proof


@dataclass(frozen=True)
class TailReports:
    sublevel: EstimateReport
    sublevel_delta_exponent: EstimateReport
    superlevel_lhs: float


def audit_gradient_tails(series: FieldSeries, k: float, delta: float, spec: ProblemSpec, ctx: WeightContext,
                         *, n=None, audit_tol: float = AUDIT_TOL) -> TailReports:
    """Gradient energy on {u <= 1/k} against (1/k + 1/n)^beta C_delta/delta^2 (beta = 1 - delta),
    the same with exponent delta, and the energy on {u >= k} (monitored, no closed bound)."""
    if not k >= 1:
        raise ArgumentError("k must be >= 1")
    n = _n_of(series, n)
    u = _nonneg_values(series)
    ux = gradient_values(u, series.grid)
    wdx = series.grid.trapezoid_weights()
    e = ux**2
    low = trapezoid_time(np.where(u <= 1.0 / k, e, 0.0) @ wdx, series.times)
    high = trapezoid_time(np.where(u >= k, e, 0.0) @ wdx, series.times)
    C = constant_C_delta(delta, spec.T, spec.u0_power_norm(delta), spec.g_inf)
    base = 1.0 / k + _shift(n)
    beta = 1.0 - delta
    det = {"k": k, "delta": delta, "constant": C}
    sub = EstimateReport(f"gradient_sublevel_k{k:g}", low, base**beta * C / delta**2, audit_tol, dict(det))
    sub_d = EstimateReport(f"gradient_sublevel_delta_exp_k{k:g}", low, base**delta * C / delta**2, audit_tol, dict(det))
    return TailReports(sub, sub_d, high)


@dataclass(frozen=True)
class InteriorConstants:
    N: float
    B0: float
    B1: float
    calC1: float
    d: float

    def to_dict(self) -> dict:
        return {"N": self.N, "B0": self.B0, "B1": self.B1, "calC1": self.calC1, "d": self.d}


def g0_sup_on(rho_g0, lam: float, lo: float, hi: float, samples: int = 4001) -> float:
    """||g0||_{L^inf([lo, hi])} from the stored product rho_lam g0, by dense sampling."""
    x = np.linspace(lo, hi, samples)
    return float(np.max(np.abs(rho_g0(x) / rho(WeightContext(lam), x))))


def interior_constants(win: InteriorWindow, lam: float, g0_sup_D: float, C1: float, theta: float = 0.0,
                       g_inf: float = 0.0) -> InteriorConstants:
    """N, B0, B1 on the cylinder, plus the improved-sup constant (1/K(t0) + ||g0 rho||) C1.

    ``g0_sup_D`` is ||g0||_{L^inf(D)}; ``g_inf`` is ||g0 rho||_{L^inf}.
    """
    K0 = float(K_of_t(win.t0, theta))
    d = win.d
    N = 1.0 / (K0 * rho(WeightContext(lam), win.d_minus)) + g0_sup_D
    B0 = 2.0 * C1 / d + N * d**2 / 2.0
    B1 = 4.0 * B0 / d + d * N / 4.0
    return InteriorConstants(N, B0, B1, (1.0 / K0 + g_inf) * C1, d)


def interior_constants_for(spec: ProblemSpec, win: InteriorWindow) -> InteriorConstants:
    C1 = constant_C_m1(0, spec.T, spec.u0_power_norm(1.0), spec.g_inf)
    gD = g0_sup_on(spec.rho_g0, spec.lam, win.d_minus, win.d_plus)
    return interior_constants(win, spec.lam, gD, C1, spec.theta, spec.g_inf)


@dataclass(frozen=True)
class InteriorReports:
    sup: EstimateReport
    lipschitz: EstimateReport
    improved_sup: EstimateReport

    def __iter__(self):
        return iter((self.sup, self.lipschitz, self.improved_sup))


def window_mask(series: FieldSeries, win: InteriorWindow) -> np.ndarray:
    t = series.physical_times
    x = series.grid.nodes
    return (t >= win.t0)[:, None] & ((x >= win.d_minus) & (x <= win.d_plus))[None, :]


def audit_interior(series: FieldSeries, win: InteriorWindow, constants: InteriorConstants, *, n=None,
                   kappa: float = KAPPA, audit_tol: float = AUDIT_TOL) -> InteriorReports:
    """sup u <= B0 and sup |u_x| <= B1 on the cylinder; u <= (calC1 x)^{1/2} + omega(n) pointwise.

    The pointwise report carries lhs = max(u - (calC1 x)^{1/2}) and rhs = omega(n).
    """
    n = _n_of(series, n)
    mask = window_mask(series, win)
    if not mask.any():
        raise ArgumentError("the window contains no grid points")
    u = series.values
    ux = gradient_values(u, series.grid)
    sup_u = float(np.max(u[mask]))
    sup_g = float(np.max(np.abs(ux[mask])))
    bound = np.sqrt(constants.calC1 * series.grid.nodes)[None, :]
    excess = float(np.max((u - bound)[mask]))
    allow = omega_allowance(n, kappa)
    det = constants.to_dict()
    return InteriorReports(
        EstimateReport("interior_sup", sup_u, constants.B0, audit_tol, dict(det)),
        EstimateReport("interior_lipschitz", sup_g, constants.B1, audit_tol, dict(det)),
        EstimateReport("improved_linfty", excess, allow, audit_tol, {**det, "allowance": allow}),
    )
