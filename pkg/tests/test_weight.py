import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from degenlab.errors import ArgumentError, DomainError
from degenlab.grid import make_graded_grid
from degenlab.weight import WeightContext, nu_interval, nu_quadrature_weights, rho


def test_rho_examples():
    assert rho(WeightContext(0.0), 2.0) == 4.0
    assert rho(WeightContext(1.0), 1.0) == pytest.approx(2.0 * math.sqrt(3.0), rel=1e-15)
    assert rho(WeightContext(1.0), 1e-14) < 1e-6


def test_rho_rejects_nonpositive_x():
    with pytest.raises(DomainError):
        rho(WeightContext(0.0), 0.0)
    with pytest.raises(ArgumentError):
        WeightContext(-1.0)


@given(st.floats(0.0, 10.0), st.floats(1e-6, 1e6))
def test_rho_positive_and_increasing(lam, x):
    ctx = WeightContext(lam)
    assert rho(ctx, x) > 0
    assert rho(ctx, x * 1.001) > rho(ctx, x)


def test_lambda_zero_is_x_squared_exactly():
    x = np.linspace(0.1, 5.0, 50)
    assert np.array_equal(rho(WeightContext(0.0), x), x * x)


def test_nu_density_is_reciprocal():
    ctx = WeightContext(0.7)
    x = np.array([0.3, 1.0, 8.0])
    np.testing.assert_allclose(ctx.nu_density(x), 1.0 / rho(ctx, x), rtol=1e-15)


def test_nu_interval_examples():
    assert nu_interval(WeightContext(0.0), 1.0, 2.0) == pytest.approx(0.5, rel=1e-15)
    assert nu_interval(WeightContext(1.0), 0.0, math.inf) == pytest.approx(math.pi / 2, rel=1e-14)
    assert nu_interval(WeightContext(0.0), 1.0, 1.0 + 1e-12) == pytest.approx(0.0, abs=1e-11)
    assert WeightContext(2.0).nu_total == pytest.approx(math.pi / 4)


@pytest.mark.parametrize("lam", [0.0, 0.3, 1.0, 5.0])
@pytest.mark.parametrize("a,b", [(0.01, 0.1), (0.5, 3.0), (2.0, 50.0)])
def test_nu_interval_matches_adaptive_quadrature(lam, a, b):
    ctx = WeightContext(lam)
    ref, _ = integrate.quad(lambda x: 1.0 / rho(ctx, x), a, b, epsabs=0, epsrel=1e-13, limit=200)
    assert nu_interval(ctx, a, b) == pytest.approx(ref, rel=1e-11)


@given(st.floats(0.0, 4.0), st.floats(0.01, 10.0), st.floats(0.01, 10.0), st.floats(0.01, 10.0))
def test_nu_interval_additive(lam, a, d1, d2):
    ctx = WeightContext(lam)
    whole = nu_interval(ctx, a, a + d1 + d2)
    parts = nu_interval(ctx, a, a + d1) + nu_interval(ctx, a + d1, a + d1 + d2)
    assert whole == pytest.approx(parts, rel=1e-10, abs=1e-14)


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_nu_interval_small_lambda_limit(a, d):
    want = nu_interval(WeightContext(0.0), a, a + d)
    for lam in (5e-324, 1e-300, 1e-12):
        assert nu_interval(WeightContext(lam), a, a + d) == pytest.approx(want, rel=1e-9)
    assert nu_interval(WeightContext(1e-300), a, math.inf) == pytest.approx(1.0 / a, rel=1e-9)


def test_nu_interval_lambda_zero_diverges_at_zero():
    with pytest.raises(Exception):
        nu_interval(WeightContext(0.0), 0.0, 1.0)


@pytest.mark.parametrize("lam", [0.0, 1.0])
def test_quadrature_weights_exact_mass(lam):
    ctx = WeightContext(lam)
    g = make_graded_grid(0.2, 7.0, 57, 1.7)
    w = nu_quadrature_weights(ctx, g)
    assert np.all(w >= 0)
    assert w.sum() == pytest.approx(nu_interval(ctx, 0.2, 7.0), rel=1e-13)


def test_quadrature_x_squared_on_unit_interval():
    g = make_graded_grid(1.0, 2.0, 201)
    w = nu_quadrature_weights(WeightContext(0.0), g)
    assert abs(np.sum(w * g.nodes**2) - 1.0) < 1e-4


def test_quadrature_second_order():
    ctx = WeightContext(1.0)
    f = np.sin
    ref, _ = integrate.quad(lambda x: f(x) / rho(ctx, x), 0.5, 3.0, epsabs=0, epsrel=1e-13)
    errs = []
    for count in (41, 81, 161):
        g = make_graded_grid(0.5, 3.0, count)
        errs.append(abs(np.sum(nu_quadrature_weights(ctx, g) * f(g.nodes)) - ref))
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5
