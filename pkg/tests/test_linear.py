import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fwlab import initial_data as idata
from fwlab import linear
from fwlab import spectral as sp
from fwlab.errors import TailToleranceError
from fwlab.spectral import Field, Grid, KernelParams

G = Grid(20.0, 1024)


# ---------------------------------------------------------------- phase function


@given(st.floats(0.01, 10.0), st.floats(0.01, 10.0), st.floats(-100.0, 100.0))
def test_multiplier_is_scaled_mu(B, b, xi):
    ph = linear.PhaseFunction(KernelParams(B, b))
    assert ph.m(xi) == pytest.approx(ph.scaled_mu(xi), rel=1e-12, abs=1e-300)


# ---------------------------------------------------------------- propagate


def test_propagate_at_zero_is_identity():
    f = idata.sample(idata.gaussian(1.0), G)
    assert np.max(np.abs(linear.propagate(f, KernelParams(0.5, 1.0), 0.0).values - f.values)) < 1e-15


def test_propagate_rejects_negative_time():
    with pytest.raises(ValueError):
        linear.propagate(idata.sample(idata.gaussian(1.0), G), KernelParams(0.5, 1.0), -1.0)


@given(st.floats(0.0, 1e3), st.floats(0.05, 5.0), st.floats(0.05, 5.0))
def test_propagate_is_unitary(t, B, b):
    f = idata.sample(idata.odd_gaussian(1.0), G)
    out = linear.propagate(f, KernelParams(B, b), t)
    assert sp.l2_norm(out) == pytest.approx(sp.l2_norm(f), rel=1e-12)


def test_propagate_is_a_semigroup():
    k = KernelParams(0.5, 1.5)
    f = idata.sample(idata.gaussian(1.0), G)
    twice = linear.propagate(linear.propagate(f, k, 1.3), k, 2.1)
    once = linear.propagate(f, k, 3.4)
    assert np.max(np.abs(twice.values - once.values)) < 1e-13


@given(st.integers(-200, 200), st.floats(0.0, 50.0))
def test_propagate_commutes_with_translation(shift, t):
    k = KernelParams(1.0, 0.7)
    f = idata.sample(idata.gaussian(1.0), G)
    moved = Field(G, np.roll(f.values, shift))
    a = np.roll(linear.propagate(f, k, t).values, shift)
    b = linear.propagate(moved, k, t).values
    assert np.max(np.abs(a - b)) < 1e-13


@pytest.mark.parametrize("B,b,t", [(2.0, 0.5, 1.0), (2.0, 0.5, 7.5), (0.25, 2.0, 3.0)])
def test_scaling_identity(B, b, t):
    # T^{B,b}(t)[u0](x) = T^{1/2,1}(2Bt)[u0(./b)](bx), with nodes y_j = b x_j
    d = idata.gaussian(1.0)
    left = linear.propagate(idata.sample(d, G), KernelParams(B, b), t)
    gy = Grid(b * G.half_width, G.n_points)
    right = linear.propagate(Field(gy, d(gy.x / b)), KernelParams(0.5, 1.0), 2 * B * t)
    assert np.max(np.abs(left.values - right.values)) <= 1e-10


# ---------------------------------------------------------------- mu derivatives


def test_mu_derivative_order_zero():
    xi = np.linspace(-5, 5, 11)
    assert np.allclose(linear.mu_derivative(0, xi), xi / (1 + xi**2), rtol=1e-15)


@given(st.floats(-50.0, 50.0))
def test_mu_second_derivative_closed_form(xi):
    expected = 2 * (xi**3 - 3 * xi) / (1 + xi**2) ** 3
    assert linear.mu_derivative(2, xi) == pytest.approx(expected, rel=1e-12, abs=1e-15)


@given(st.floats(-50.0, 50.0))
def test_mu_third_derivative_closed_form(xi):
    expected = -6 * (xi**4 - 6 * xi**2 + 1) / (1 + xi**2) ** 4
    assert linear.mu_derivative(3, xi) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_mu_second_derivative_zeros_are_nondegenerate():
    for z in (0.0, math.sqrt(3), -math.sqrt(3)):
        assert abs(linear.mu_derivative(2, z)) < 1e-15
        assert abs(linear.mu_derivative(3, z)) > 0.1
    assert linear.mu_derivative(3, 0.0) == -6.0
    # -6(9 - 18 + 1)/4^4 = 48/256
    assert linear.mu_derivative(3, math.sqrt(3)) == pytest.approx(0.1875, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_mu_derivative_matches_finite_differences(n):
    xi = np.linspace(-10, 10, 2001)
    # truncation h^2 |mu^(n+2)|/6 with |mu^(n)| up to n!; roundoff ~ eps/h
    h = 1e-5
    fd = (linear.mu_derivative(n - 1, xi + h) - linear.mu_derivative(n - 1, xi - h)) / (2 * h)
    assert np.max(np.abs(fd - linear.mu_derivative(n, xi))) <= 1e-6


def test_mu_second_derivative_lower_bound():
    xi = np.concatenate([np.linspace(math.sqrt(6) + 1e-9, 1e3, 200001), -np.geomspace(math.sqrt(6) + 1e-9, 1e6, 2001)])
    assert np.all(np.abs(linear.mu_derivative(2, xi)) >= np.abs(xi) ** -3 / 8)


@pytest.mark.parametrize("n", [-1, 13, 2.5])
def test_mu_derivative_rejects_orders(n):
    with pytest.raises(ValueError):
        linear.mu_derivative(n, 1.0)


# ---------------------------------------------------------------- decay


def test_predicted_slopes():
    assert linear.predicted_slope(2) == 0.0
    assert linear.predicted_slope(4) == pytest.approx(-1 / 6)
    assert linear.predicted_slope(math.inf) == pytest.approx(-1 / 3)


def test_decay_box_and_grid():
    k = KernelParams(0.5, 1.0)
    assert linear.decay_box(k, 100.0) == pytest.approx(220.0)
    g = linear.decay_grid(k, 100.0)
    assert g.half_width == 220.0 and g.dx <= 0.1


@pytest.fixture(scope="module")
def decay_setup():
    k = KernelParams(0.5, 1.0)
    g = linear.decay_grid(k, 100.0)
    return k, idata.sample(idata.gaussian(1.0), g), np.geomspace(10, 100, 12)


def test_l2_decay_slope_is_zero(decay_setup):
    k, u0, ts = decay_setup
    fit = linear.measure_decay(u0, k, 2, ts)
    assert abs(fit.slope) < 1e-12


def test_l4_decay_slope(decay_setup):
    k, u0, ts = decay_setup
    fit = linear.measure_decay(u0, k, 4, ts)
    assert abs(fit.slope - fit.predicted_slope) <= 0.05


def test_sup_norm_decay_at_late_times():
    # over [10, 100] the sup norm is still in a pre-asymptotic regime; by
    # t ~ 1e3 the measured exponent has settled near -1/3
    k = KernelParams(0.5, 1.0)
    g = linear.decay_grid(k, 1e4)
    fit = linear.measure_decay(idata.sample(idata.gaussian(1.0), g), k, math.inf, np.geomspace(1e3, 1e4, 8))
    assert abs(fit.slope + 1 / 3) <= 0.05


def test_decay_detects_box_escape():
    k = KernelParams(0.5, 1.0)
    u0 = idata.sample(idata.gaussian(1.0), G)
    with pytest.raises(TailToleranceError):
        linear.measure_decay(u0, k, math.inf, np.geomspace(10, 1000, 8))


@pytest.mark.parametrize("kw", [{"t_grid": np.geomspace(1, 10, 5)}, {"t_grid": np.linspace(0, 10, 9)}, {"r": 1.0}])
def test_decay_argument_validation(kw):
    args = {"t_grid": np.geomspace(1, 10, 8), "r": 4.0, **kw}
    with pytest.raises(ValueError):
        linear.measure_decay(idata.sample(idata.gaussian(1.0), G), KernelParams(0.5, 1.0), args["r"], args["t_grid"])


def test_decay_csv(decay_setup):
    k, u0, ts = decay_setup
    fits = [linear.measure_decay(u0, k, r, ts) for r in (2, 4)]
    lines = linear.decay_fits_to_csv(fits).splitlines()
    assert lines[0] == "r,predicted_slope,measured_slope,residual"
    assert len(lines) == 3
