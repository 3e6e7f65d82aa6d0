import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenlab.errors import ArgumentError, DataError, PositivityViolation
from degenlab.experiment import manufactured_error, manufactured_run, manufactured_solution
from degenlab.grid import Field, FieldSeries, make_graded_grid
from degenlab.solver import (BumpTestFunction, GridParams, ProblemSpec, RegularizedInstance, integrate_instance,
                             mollifier_radius, mollify_data, schedule_defect, solve, step, truncation_schedule,
                             weak_residual)
from degenlab.weight import WeightContext, nu_quadrature_weights


def test_truncation_schedule_examples():
    assert truncation_schedule(0.0, 4) == (0.5, 4.0)
    assert schedule_defect(0.0, 100) == pytest.approx((10.0 - 0.01) / 100.0, rel=1e-12)
    assert truncation_schedule(1.0, 10) == (0.1, 10.0)
    assert schedule_defect(1.0, 10) <= math.pi / 20


@pytest.mark.parametrize("lam", [0.0, 1.0])
def test_schedule_nested_and_defect_vanishing(lam):
    ns = [2, 5, 10, 100, 1000, 10**5]
    ab = [truncation_schedule(lam, n) for n in ns]
    assert all(a2 < a1 and b1 < b2 for (a1, b1), (a2, b2) in zip(ab, ab[1:]))
    d = [schedule_defect(lam, n) for n in ns]
    assert all(y < x for x, y in zip(d, d[1:])) and d[-1] < 1e-2


def test_schedule_rejects_small_n():
    with pytest.raises(ArgumentError):
        truncation_schedule(0.0, 1)


def _instance(spec, n, count=2001, grading=1.0):
    a, b = truncation_schedule(spec.lam, n)
    return mollify_data(spec, n, make_graded_grid(a, b, count, grading))


def test_mollify_zero_g_stays_zero():
    spec = ProblemSpec.from_catalog(0.0, 1.0, ("bump", {}))
    for n in (10, 100):
        assert np.all(_instance(spec, n).rho_gn.values == 0)


def test_mollify_smooth_data_close_to_original():
    spec = ProblemSpec.from_catalog(0.0, 1.0, ("bump", {"center": 2.0, "width": 1.0}))
    n = 100
    inst = _instance(spec, n, 4001)
    x = inst.grid.nodes
    grad = np.max(np.abs(np.gradient(spec.u0(x), x)))
    assert np.max(np.abs(inst.u0n.values - spec.u0(x))) <= mollifier_radius(0.0, n) * grad


@pytest.mark.parametrize("g", [("bump", {}), ("dipole", {"width": 0.8})])
def test_mollify_g_bounds(g):
    spec = ProblemSpec.from_catalog(1.0, 1.0, ("bump", {}), g)
    inst = _instance(spec, 10)
    rg = inst.rho_gn.values
    assert np.max(np.abs(rg)) <= spec.rho_g0.sup_abs + 1e-15
    assert np.min(rg) >= -spec.theta - 1e-15
    if spec.rho_g0.inf >= 0:
        assert np.all(rg >= 0)


def test_mollified_data_nonnegative_and_zero_at_ends():
    spec = ProblemSpec.from_catalog(0.0, 1.0, ("special", {}))
    for n in (10, 100):
        u = _instance(spec, n).u0n.values
        assert np.all(u >= 0) and u[0] == 0 and u[-1] == 0


def test_mollify_special_profile_converges_in_l1_nu():
    spec = ProblemSpec.from_catalog(0.0, 1.0, ("special", {}))
    errs = []
    for n in (10, 100, 1000):
        inst = _instance(spec, n, 40001, 2.0)
        w = nu_quadrature_weights(WeightContext(0.0), inst.grid)
        errs.append(float(np.sum(w * np.abs(inst.u0n.values - spec.u0(inst.grid.nodes)))))
    assert errs[0] > errs[1] > errs[2]


def test_mollify_rejects_wrong_grid():
    spec = ProblemSpec.from_catalog(0.0, 1.0, ("bump", {}))
    with pytest.raises(ArgumentError):
        mollify_data(spec, 10, make_graded_grid(0.5, 10.0, 11))


def test_problem_spec_theta_and_data_checks():
    spec = ProblemSpec.from_catalog(0.0, 1.0, ("bump", {}), ("dipole", {"negative": 0.5}))
    assert spec.theta == pytest.approx(0.5, rel=1e-3)
    with pytest.raises(DataError):
        ProblemSpec.from_catalog(0.0, 1.0, ("bump", {}), ("dipole", {"negative": 0.5}), theta=0.1)
    with pytest.raises(ArgumentError):
        ProblemSpec.from_catalog(0.0, 0.0, ("bump", {}))


def test_step_zero_fixed_point():
    g = make_graded_grid(0.5, 4.0, 50)
    inst = RegularizedInstance.direct(g, np.zeros(50), n=10)
    out = step(inst.u0n, 0.0, 0.01, inst, WeightContext(0.0))
    assert np.all(out.values == 0)


def test_step_zero_state_negative_source_bound():
    g = make_graded_grid(0.5, 4.0, 50)
    n, dt = 10, 0.05
    rg = -0.8 * np.ones(50)
    inst = RegularizedInstance.direct(g, np.zeros(50), rho_g=rg, n=n)
    out = step(inst.u0n, 0.0, dt, inst, WeightContext(0.0), positivity_tol=1.0)
    bound = dt * 0.8 / n / (1 - dt * 0.8)
    assert np.max(np.abs(out.values)) <= bound + 1e-15
    with pytest.raises(PositivityViolation) as info:
        step(inst.u0n, 0.0, dt, inst, WeightContext(0.0), positivity_tol=1e-12)
    assert info.value.index is not None and info.value.value < 0


def test_step_rejects_m_matrix_violation():
    g = make_graded_grid(0.5, 4.0, 20)
    inst = RegularizedInstance.direct(g, np.ones(20), rho_g=np.full(20, 2.0), n=10)
    with pytest.raises(ArgumentError):
        step(inst.u0n, 0.0, 0.5, inst, WeightContext(0.0))


def test_step_local_error_shrinks_with_dt():
    sol = manufactured_solution()
    g = make_graded_grid(0.5, 8.0, 1500)
    x = g.nodes
    inst = RegularizedInstance.direct(g, sol.F(x))
    inside = (x > 2.3) & (x < 3.7)
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        new = step(inst.u0n, 1.0, dt, inst, WeightContext(0.0)).values
        errs.append(np.max(np.abs(new - sol.u(1.0 + dt, x))[inside]))
    h = g.h_max
    assert errs[0] <= 10 * (4e-3**2 + h**2)
    assert errs[0] / errs[1] >= 1.9 and errs[1] / errs[2] >= 1.9


def test_solve_zero_data_stays_zero():
    spec = ProblemSpec.from_catalog(0.0, 0.5, ("zero", {}))
    s = solve(spec, 10, (100, 1.0), 0.01)
    assert np.all(s.values == 0)


def test_zero_data_with_source_grows_like_one_over_n():
    # the regularized source rho g (u + 1/n) feeds zero data at rate ~ ||rho g|| / n
    spec = ProblemSpec.from_catalog(0.0, 0.5, ("zero", {}), ("bump", {}))
    tops = [solve(spec, n, (200, 1.0), 0.01).values.max() for n in (10, 100)]
    assert 0 < tops[1] < tops[0] <= 0.5 * math.exp(0.5) / 10


@pytest.mark.parametrize("lam", [0.0, 1.0])
def test_solve_maximum_principle(lam):
    spec = ProblemSpec.from_catalog(lam, 1.0, ("bump", {}))
    s = solve(spec, 10, GridParams(300, 2.0), 0.005)
    u0n = s.meta["instance"].u0n.values
    tol = 1e-10 * u0n.max()
    assert s.values.max() <= u0n.max() + tol
    assert s.values.min() >= 0
    assert s.meta["C_inf_margin"] >= -tol


def test_solve_meta_and_snapshots():
    spec = ProblemSpec.from_catalog(0.0, 0.1, ("bump", {}))
    s = solve(spec, 10, (100, 1.0), 0.01, save_every=3)
    np.testing.assert_allclose(s.times, [0.0, 0.03, 0.06, 0.09, 0.1])
    assert s.meta["steps"] == 10 and s.meta["n"] == 10 and s.meta["nodes"] == 100


def test_solve_rejects_dt_not_dividing_T():
    spec = ProblemSpec.from_catalog(0.0, 0.1, ("bump", {}))
    with pytest.raises(ArgumentError):
        solve(spec, 10, (50, 1.0), 0.03)


def test_manufactured_first_order_decay():
    errs = []
    for k, (count, dt) in enumerate([(200, 4e-3), (399, 2e-3), (797, 1e-3)]):
        s, sol = manufactured_run(count, dt, save_every=10**6)
        errs.append(manufactured_error(s, sol))
    assert errs[0] / errs[1] >= 1.8 and errs[1] / errs[2] >= 1.8


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.1, 2.0), st.floats(1.5, 3.5), st.floats(0.2, 1.0))
def test_positivity_and_max_principle_property(lam, amp, center, width):
    spec = ProblemSpec.from_catalog(lam, 0.2, ("bump", {"amplitude": amp, "center": center, "width": width}))
    s = solve(spec, 10, (120, 1.0), 0.01)
    top = s.meta["instance"].u0n.values.max()
    assert s.values.min() >= 0
    assert s.values.max() <= top * (1 + 1e-10)


# -- weak form


def _phi():
    return BumpTestFunction(3.0, 0.6, 0.5, 0.4)


def test_weak_residual_trivial_cases():
    g = make_graded_grid(0.5, 8.0, 101)
    times = np.linspace(0.0, 1.0, 21)
    zero = FieldSeries(g, times, np.zeros((21, 101)))
    assert weak_residual(zero, _phi(), WeightContext(0.0)) == 0.0
    s, _ = manufactured_run(101, 0.05)
    nothing = BumpTestFunction(3.0, 0.6, 50.0, 0.1)
    assert weak_residual(s, nothing, WeightContext(0.0)) == 0.0


def test_weak_residual_rejects_boundary_support():
    s, _ = manufactured_run(101, 0.05)
    with pytest.raises(ArgumentError):
        weak_residual(s, BumpTestFunction(0.5, 0.6, 0.5, 0.4), WeightContext(0.0))


def test_weak_residual_converges_on_separated_solution():
    res = []
    for count, dt in [(200, 4e-3), (399, 2e-3), (797, 1e-3)]:
        s, _ = manufactured_run(count, dt)
        res.append(abs(weak_residual(s, _phi(), WeightContext(0.0))))
    assert res[0] / res[1] >= 2 and res[1] / res[2] >= 2
