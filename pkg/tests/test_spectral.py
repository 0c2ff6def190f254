import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fwlab import spectral as sp
from fwlab import initial_data as idata
from fwlab.errors import GridMismatchError, NonFiniteError, TailToleranceError
from fwlab.spectral import Field, Grid, KernelParams, SpectralCoeffs

from kernel_oracle import kernel_term_quadrature
from oracles import KERNEL_CONV

G = Grid(20.0, 1024)


def smooth_random(grid, seed, n_modes=40):
    """Band-limited random field decaying away from the origin."""
    rng = np.random.default_rng(seed)
    x = grid.x
    out = np.zeros_like(x)
    for k in range(1, n_modes):
        out += rng.normal() * np.cos(k * x / 3 + rng.uniform(0, 2 * np.pi)) / k**2
    return Field(grid, out * np.exp(-(x**2) / 8))


# ---------------------------------------------------------------- Grid


def test_grid_spacing_and_wavenumbers():
    g = Grid(20.0, 2048)
    assert g.dx * g.n_points == 2 * g.half_width
    assert g.xi[1] == pytest.approx(math.pi / 20.0)
    assert g.xi[g.nyquist_index] == pytest.approx(-math.pi * 1024 / 20.0)
    assert g.x[0] == -20.0 and g.x[-1] < 20.0


@pytest.mark.parametrize("n", [8, 100, 1000, 0])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        Grid(20.0, n)


def test_grid_rejects_nonpositive_width():
    with pytest.raises(ValueError):
        Grid(-1.0, 64)


def test_grid_arrays_are_read_only():
    with pytest.raises(ValueError):
        G.x[0] = 1.0


def test_dealias_mask_keeps_two_thirds():
    m = Grid(1.0, 128).dealias_mask()
    assert m.sum() == 2 * 42 + 1


# ---------------------------------------------------------------- Field


def test_field_rejects_wrong_shape():
    with pytest.raises(ValueError):
        Field(G, np.zeros(3))


def test_field_arithmetic_requires_same_grid():
    a = Field(G, np.ones(G.n_points))
    b = Field(Grid(10.0, 1024), np.ones(1024))
    with pytest.raises(GridMismatchError):
        a + b


def test_non_finite_field_is_refused():
    v = np.zeros(G.n_points)
    v[3] = np.nan
    f = Field(G, v)
    assert not f.is_finite
    with pytest.raises(NonFiniteError):
        sp.forward(f)


# ---------------------------------------------------------------- transforms


def test_constant_has_only_zero_mode():
    c = sp.forward(Field(G, np.ones(G.n_points))).coeffs
    assert c[0] == pytest.approx(1.0)
    assert np.max(np.abs(c[1:])) < 1e-15


def test_single_harmonic_has_two_modes():
    f = Field(G, np.cos(np.pi * G.x / G.half_width))
    c = sp.forward(f).coeffs
    nz = np.nonzero(np.abs(c) > 1e-12)[0]
    assert set(nz) == {1, G.n_points - 1}


@given(st.integers(0, 2**32 - 1))
def test_round_trip_identity(seed):
    f = smooth_random(G, seed)
    back = sp.inverse(sp.forward(f))
    assert sp.l2_norm(back - f) <= 1e-12 * sp.l2_norm(f)


@given(st.integers(0, 2**32 - 1))
def test_conjugate_symmetry_of_real_fields(seed):
    c = sp.forward(smooth_random(G, seed)).coeffs
    k = np.arange(1, G.n_points // 2)
    assert np.allclose(c[-k], np.conj(c[k]), atol=1e-15)


# ---------------------------------------------------------------- multipliers


def test_zero_and_identity_multipliers():
    c = sp.forward(smooth_random(G, 1))
    assert np.all(sp.apply_multiplier(c, 0.0).coeffs == 0)
    assert np.array_equal(sp.apply_multiplier(c, 1.0).coeffs, c.coeffs)


def test_i_xi_multiplier_differentiates_a_harmonic():
    k = np.pi / G.half_width
    c = sp.forward(Field(G, np.sin(k * G.x)))
    out = sp.inverse(sp.apply_multiplier(c, lambda xi: 1j * xi))
    assert np.max(np.abs(out.values - k * np.cos(k * G.x))) < 1e-12


def test_non_finite_multiplier_is_refused():
    c = sp.forward(smooth_random(G, 2))
    with pytest.raises(NonFiniteError):
        sp.apply_multiplier(c, lambda xi: 1.0 / xi)


@given(st.integers(1, 60), st.integers(1, 3))
def test_derivative_of_single_harmonic_is_exact(k, order):
    g = Grid(3.0, 128)
    w = np.pi * k / g.half_width
    f = Field(g, np.sin(w * g.x))
    expected = w**order * np.sin(w * g.x + order * np.pi / 2)
    # roundoff scales with the harmonic itself and with the largest grid wavenumber
    kmax = np.pi * g.n_points / (2 * g.half_width)
    assert np.max(np.abs(sp.derivative(f, order).values - expected)) <= 1e-13 * (w**order + kmax**order)


def test_fw_multiplier_examples():
    assert sp.fw_multiplier(KernelParams(0.5, 1.0), 0.0) == 0.0
    assert sp.fw_multiplier(KernelParams(0.5, 1.0), 1.0) == pytest.approx(0.5, abs=1e-15)
    assert sp.fw_multiplier(KernelParams(0.5, 1.5), 1.5) == pytest.approx(0.5, abs=1e-15)


@given(st.floats(0.01, 10.0), st.floats(0.01, 10.0), st.floats(-1e4, 1e4))
def test_fw_multiplier_odd_and_bounded(B, b, xi):
    k = KernelParams(B, b)
    m = sp.fw_multiplier(k, xi)
    assert sp.fw_multiplier(k, -xi) == -m
    assert abs(m) <= B * (1 + 1e-12)
    assert sp.fw_multiplier(k, b) == pytest.approx(B, rel=1e-12)


def test_kernel_params_validation():
    with pytest.raises(ValueError):
        KernelParams(0.0, 1.0)
    with pytest.raises(ValueError):
        KernelParams(1.0, 0.0)
    assert KernelParams.burgers().is_burgers


# ---------------------------------------------------------------- nonlocal term


def test_kernel_convolve_of_zero():
    out = sp.kernel_convolve(Field(G, np.zeros(G.n_points)), KernelParams(0.5, 1.5))
    assert np.all(out.values == 0)


def test_kernel_convolve_parity():
    f = idata.sample(idata.odd_gaussian(1.0), G)
    out = sp.kernel_convolve(f, KernelParams(0.5, 1.5)).values
    # x -> -x maps node j to N - j (node 0 is -L, its own mirror by periodicity)
    mirrored = np.roll(out[::-1], 1)
    assert np.max(np.abs(out - mirrored)) < 1e-14


def test_kernel_convolve_refuses_wide_data():
    f = Field(G, np.exp(-(G.x**2) / 200))
    with pytest.raises(TailToleranceError):
        sp.kernel_convolve(f, KernelParams(0.5, 1.5))


@pytest.mark.parametrize("lam", [0.5, 1.0, 4.0])
@pytest.mark.parametrize("B,b", [(0.5, 1.5), (1.0, 1.0), (2.0, 0.25)])
def test_kernel_convolve_matches_quadrature(lam, B, b):
    g = Grid(20.0, 2048)
    d = idata.gaussian(lam)
    spec = sp.kernel_convolve(idata.sample(d, g), KernelParams(B, b)).values
    ref = kernel_term_quadrature(d.derivative, g.x, B, b, g.half_width)
    assert np.max(np.abs(spec - ref)) <= 1e-8


@pytest.mark.parametrize("key", sorted(KERNEL_CONV))
def test_kernel_convolve_frozen_values(key):
    B, b, lam = key
    g = Grid(20.0, 2048)
    out = sp.kernel_convolve(idata.sample(idata.gaussian(lam), g), KernelParams(B, b)).values
    for j, val in KERNEL_CONV[key].items():
        assert out[g.n_points // 2 + j] == pytest.approx(val, abs=1e-12)


def test_periodized_kernel_matches_image_sum():
    k = KernelParams(2.0, 0.25)
    y = np.linspace(-20, 20, 41)
    images = sum(2.0 * np.exp(-0.25 * np.abs(y + 40 * n)) for n in range(-200, 201))
    assert np.allclose(sp.periodized_kernel(y, k, 20.0), images, rtol=1e-12)


# ---------------------------------------------------------------- norms


def test_norms_of_zero():
    n = sp.norms(Field(G, np.zeros(G.n_points)), 2.0)
    assert n.l2 == n.linf == n.h_s == n.w_s1 == 0.0


def test_gaussian_l2_closed_form():
    f = idata.sample(idata.gaussian(1.0), G)
    assert sp.l2_norm(f) == pytest.approx(2**-0.25 * math.pi**0.25, rel=1e-6)


def test_odd_gaussian_l2_closed_form():
    f = idata.sample(idata.odd_gaussian(1.0), G)
    assert sp.l2_norm(f) == pytest.approx(2**-1.25 * math.pi**0.25, rel=1e-6)


@given(st.integers(0, 2**32 - 1))
def test_h0_equals_l2(seed):
    f = smooth_random(G, seed)
    assert sp.hs_norm(f, 0.0) == pytest.approx(sp.l2_norm(f), rel=1e-12)


def test_h1_norm_of_gaussian():
    # ||f||_{H^1}^2 = ||f||_2^2 + ||f'||_2^2 = sqrt(pi/2) (1 + 1) for exp(-x^2)
    f = idata.sample(idata.gaussian(1.0), G)
    assert sp.hs_norm(f, 1.0) == pytest.approx(math.sqrt(2 * math.sqrt(math.pi / 2)), rel=1e-10)


def test_w01_norm_is_l1():
    f = idata.sample(idata.gaussian(1.0), G)
    assert sp.ws1_norm(f, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_lp_norms():
    f = idata.sample(idata.gaussian(1.0), G)
    assert sp.lp_norm(f, math.inf) == 1.0
    # ||exp(-x^2)||_4 = (pi/4)^{1/8}
    assert sp.lp_norm(f, 4) == pytest.approx((math.pi / 4) ** 0.125, rel=1e-10)


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        sp.hs_norm(Field(G, np.zeros(G.n_points)), -1)


# ---------------------------------------------------------------- resampling and interpolation


@pytest.mark.parametrize("factor", [2, 4])
def test_resample_up_is_exact_interpolation(factor):
    f = idata.sample(idata.gaussian(1.0), G)
    fine = sp.resample(f, G.n_points * factor)
    assert np.max(np.abs(fine.values - np.exp(-fine.grid.x**2))) < 1e-13
    assert np.max(np.abs(sp.resample(fine, G.n_points).values - f.values)) < 1e-14


def test_interpolate_off_grid():
    f = idata.sample(idata.gaussian(1.0), G)
    pts = np.array([-1.2345, 0.0, 0.5, 3.14159])
    assert np.allclose(sp.interpolate(sp.forward(f), pts), np.exp(-pts**2), atol=1e-13)


def test_interpolate_handles_nyquist_mode():
    g = Grid(1.0, 16)
    f = Field(g, np.cos(np.pi * 8 * g.x))  # pure Nyquist oscillation
    assert np.allclose(sp.interpolate(sp.forward(f), g.x), f.values, atol=1e-14)


def test_tail_indicator():
    f = idata.sample(idata.gaussian(1.0), G)
    assert sp.check_tail(f) < 1e-170
    wide = Field(G, np.ones(G.n_points))
    assert sp.tail_indicator(wide) == 1.0
