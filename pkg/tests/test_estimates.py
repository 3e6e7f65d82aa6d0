import math

import numpy as np
import pytest

from degenlab.errors import ArgumentError
from degenlab.estimates import (EstimateReport, InteriorWindow, audit_delta, audit_gradient_tails, audit_interior,
                                audit_lp, audit_time_weighted, constant_C_delta, constant_C_m1, constant_C_prime,
                                constant_C_prime_proof, interior_constants, interior_constants_for, omega_allowance,
                                semiconvex_lip_bound, semiconvex_sup_bound)
from degenlab.experiment import manufactured_run
from degenlab.grid import FieldSeries, make_graded_grid
from degenlab.solver import ProblemSpec
from degenlab.weight import WeightContext

CTX0 = WeightContext(0.0)


@pytest.fixture(scope="module")
def special_run():
    series, sol = manufactured_run(400, 4e-3, save_every=5)
    spec = ProblemSpec.from_catalog(0.0, 1.0, ("special", {}))
    return series, spec


@pytest.fixture(scope="module")
def zero_run():
    g = make_graded_grid(0.5, 8.0, 50)
    series = FieldSeries(g, np.linspace(0, 1, 11), np.zeros((11, 50)))
    return series, ProblemSpec.from_catalog(0.0, 1.0, ("zero", {}))


def test_constant_C_m1_examples():
    assert constant_C_m1(0, 3.0, 0.7, 0.0) == 0.7
    assert constant_C_m1(1, 1.0, 1.0, 1.0) == pytest.approx(math.e + 1.0, rel=1e-15)
    assert constant_C_m1(2, 0.0, 0.4, 5.0) == 0.4
    with pytest.raises(ArgumentError):
        constant_C_m1(3, 1.0, 1.0, 1.0)


def test_constant_C_delta_examples():
    assert constant_C_delta(0.5, 2.0, 0.3, 0.0) == 0.3
    assert constant_C_delta(0.5, 2.0, 1.0, 1.0) == pytest.approx(math.e + 1.0, rel=1e-15)
    near_one = constant_C_delta(1 - 1e-12, 1.0, 0.8, 0.0)
    assert near_one == pytest.approx(constant_C_m1(0, 1.0, 0.8, 0.0))


def test_constant_C_prime_examples():
    assert constant_C_prime(1.0, 2.0) == 1.0
    assert constant_C_prime(3.0, 0.0) == 0.0
    assert constant_C_prime(0.0, 4.0) == 0.0
    assert constant_C_prime_proof(2.0, 1.0, 0.5) == pytest.approx(2.0)


def test_omega_allowance():
    assert omega_allowance(100) == pytest.approx(0.1)
    assert omega_allowance(None) == 0.0


def test_interior_constants_examples():
    c = interior_constants(InteriorWindow(1.0, 1.0, 2.0), 0.0, 0.0, 1.0)
    assert c.N == 1.0
    assert c.B0 == pytest.approx(2.0 * 1.0 + 0.5)
    spec = ProblemSpec.from_catalog(0.0, 2.0, ("special", {}))
    c2 = interior_constants_for(spec, InteriorWindow(1.0, 1.0, 2.0))
    C1 = spec.u0_power_norm(1.0)
    assert c2.N == pytest.approx(1.0) and c2.B0 == pytest.approx(2 * C1 + 0.5)


def test_semiconvex_bounds():
    assert semiconvex_lip_bound(1.0, 1.0, 0.0) == 2.0
    assert semiconvex_sup_bound(0.0, 3.0, 0.0) == 0.0
    assert semiconvex_sup_bound(2.0, 1.0, 2.0, 1) == pytest.approx(2.0)
    # the B0, B1 formulas with C1 = 1, d = 1, N = 0
    B0 = semiconvex_sup_bound(2.0, 1.0, 0.0, 1)
    assert B0 == pytest.approx(1.0)
    assert semiconvex_lip_bound(2.0, 1.0, 0.0) == 4.0
    assert semiconvex_sup_bound(0.0, 1e9, 0.0) == 0.0


def test_interior_B_formulas_limits():
    w = InteriorWindow(1.0, 1.0, 2.0)
    c = interior_constants(w, 0.0, 0.0, 1.0)
    assert 2 * 1.0 / w.d == 2.0
    assert 4 * 2.0 / w.d == 8.0
    far = InteriorWindow(1.0, 1e8, 2e8)
    assert 2.0 * 1.0 / far.d < 1e-7


def test_report_pass_rule():
    assert EstimateReport("x", 1.04, 1.0).passed
    assert not EstimateReport("x", 1.06, 1.0).passed
    d = EstimateReport("x", 0.5, 1.0, details={"k": 1}).to_dict()
    assert d["margin"] == 0.5 and d["pass"] and d["k"] == 1


STATED_FORM = ("for g0 = 0 the energy identity holds with equality in running form, so sup_t of the "
               "norm plus the full-horizon gradient integral exceeds the constant")


@pytest.mark.parametrize("m", [0, 1, 2])
def test_lp_audit_zero_and_corrupted(m, special_run, zero_run):
    zs, zspec = zero_run
    z = audit_lp(zs, m, zspec, CTX0)
    assert z.lhs == 0.0 and z.passed
    series, spec = special_run
    bad = audit_lp(series.with_values(10 * series.values), m, spec, CTX0)
    assert not bad.passed


@pytest.mark.parametrize("m", [0, 1, 2])
def test_lp_audit_special_running_form(m, special_run):
    series, spec = special_run
    r = audit_lp(series, m, spec, CTX0)
    if m == 0:
        assert r.rhs == pytest.approx(spec.u0_power_norm(1.0))
    assert r.details["running_lhs"] <= r.rhs * (1 + r.audit_tol)


@pytest.mark.xfail(strict=True, reason=STATED_FORM)
@pytest.mark.parametrize("m", [0, 1, 2])
def test_lp_audit_special_stated_form(m, special_run):
    series, spec = special_run
    assert audit_lp(series, m, spec, CTX0).passed


def test_delta_audit(special_run, zero_run):
    zs, zspec = zero_run
    for rep in audit_delta(zs, 0.5, zspec, CTX0):
        assert rep.lhs == 0.0 and rep.passed
    series, spec = special_run
    assert audit_delta(series, 0.5, spec, CTX0)[1].passed
    bad = audit_delta(series.with_values(10 * series.values), 0.5, spec, CTX0)
    assert not any(r.passed for r in bad)


@pytest.mark.xfail(strict=True, reason=STATED_FORM)
def test_delta_audit_special_stated_form(special_run):
    series, spec = special_run
    assert audit_delta(series, 0.5, spec, CTX0)[0].passed


def test_time_weighted_audit(special_run, zero_run):
    zs, zspec = zero_run
    for rep in audit_time_weighted(zs, zspec, CTX0):
        assert rep.lhs == 0.0 and rep.passed
    series, spec = special_run
    assert audit_time_weighted(series, spec, CTX0)[1].passed
    stationary = series.with_values(np.tile(series.values[0], (len(series), 1)))
    assert audit_time_weighted(stationary, spec, CTX0)[0].details["time_term"] == pytest.approx(0.0, abs=1e-20)


@pytest.mark.xfail(strict=True, reason="C' = C0 g/2 vanishes for g0 = 0 while the left side does not")
def test_time_weighted_stated_constant_special(special_run):
    series, spec = special_run
    assert audit_time_weighted(series, spec, CTX0)[0].passed


def test_gradient_tails(special_run):
    series, spec = special_run
    for k in (2, 4, 8):
        tr = audit_gradient_tails(series, k, 0.5, spec, CTX0)
        assert tr.sublevel.passed
    big = series.with_values(series.values + 1.5)
    assert audit_gradient_tails(big, 1, 0.5, spec, CTX0).sublevel.lhs == 0.0
    # only the u <= 1 nodes contribute
    x = series.grid.nodes
    step = FieldSeries(series.grid, series.times, np.tile(np.where(x < 3, 1.0, 2.0 + x), (len(series), 1)))
    low = audit_gradient_tails(step, 1, 0.5, spec, CTX0).sublevel.lhs
    ux = np.gradient(step.values[0], x)
    want = np.sum(np.where(step.values[0] <= 1, ux**2, 0.0) * series.grid.trapezoid_weights()) * series.times[-1]
    assert low == pytest.approx(want, rel=1e-12)
    assert audit_gradient_tails(series, 1e6, 0.5, spec, CTX0).superlevel_lhs == 0.0
    with pytest.raises(ArgumentError):
        audit_gradient_tails(series, 0.5, 0.5, spec, CTX0)


def test_interior_audit(special_run, zero_run):
    series, spec = special_run
    win = InteriorWindow(1.2, 2.2, 3.8)
    consts = interior_constants_for(spec, InteriorWindow(0.2, 2.2, 3.8))
    zero = FieldSeries(series.grid, series.times, np.zeros_like(series.values), series.t0)
    assert all(r.passed for r in audit_interior(zero, win, consts))
    assert all(r.passed for r in audit_interior(series, win, consts))
    bad = audit_interior(series.with_values(1e3 * series.values), win, consts)
    assert not bad.sup.passed and not bad.lipschitz.passed
