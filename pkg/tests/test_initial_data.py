import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fwlab import initial_data as idata
from fwlab import spectral as sp
from fwlab.errors import TailToleranceError
from fwlab.spectral import Field, Grid

G2048 = Grid(20.0, 2048)
E = math.e


def grid_inf(d, grid):
    fine = grid.refined(16).x
    v = d.derivative(fine)
    i = int(np.argmin(v))
    return v[i], fine[i]


# ---------------------------------------------------------------- gaussian


def test_gaussian_point_values():
    d = idata.gaussian(1.0)
    assert d(1.0) == pytest.approx(1 / E, rel=1e-15)
    assert d.derivative(1.0) == pytest.approx(-2 / E, rel=1e-15)


@pytest.mark.parametrize("lam", [1.0, 2.5, 4.0])
def test_gaussian_slope_at_inverse_root(lam):
    d = idata.gaussian(lam)
    assert d.derivative(1 / math.sqrt(lam)) == pytest.approx(-2 * math.sqrt(lam) / E, rel=1e-14)


def test_gaussian_inf_derivative():
    d = idata.gaussian(1.0)
    assert d.inf_deriv == pytest.approx(-0.857763, abs=1e-6)
    assert d.inf_deriv == pytest.approx(-math.sqrt(2) * math.exp(-0.5), rel=1e-15)
    assert d.argmin_deriv == pytest.approx(1 / math.sqrt(2))


def test_gaussian_l2_lambda_4():
    d = idata.gaussian(4.0)
    assert d.l2_norm == pytest.approx(2**-0.25 * math.pi**0.25 * 4**-0.25, rel=1e-15)


# ---------------------------------------------------------------- odd gaussian


def test_odd_gaussian_point_values():
    d = idata.odd_gaussian(1.0)
    assert d.derivative(0.0) == -1.0
    assert d.derivative(0.5) == pytest.approx(-0.5 * math.exp(-0.25), rel=1e-15)
    assert d.l2_norm == pytest.approx(2**-1.25 * math.pi**0.25, rel=1e-15)


@pytest.mark.parametrize("lam", [1.0, 3.0, 9.0])
def test_odd_gaussian_half_root_values(lam):
    d = idata.odd_gaussian(lam)
    x = 1 / (2 * math.sqrt(lam))
    assert d(x) == pytest.approx(-0.5 / math.sqrt(lam) * math.exp(-0.25), rel=1e-14)
    assert d.derivative(x) == pytest.approx(-0.5 * math.exp(-0.25), rel=1e-14)
    assert d.inf_deriv == -1.0 and d.argmin_deriv == 0.0


# ---------------------------------------------------------------- validation and flags


@pytest.mark.parametrize("factory", [idata.gaussian, idata.odd_gaussian])
@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_nonpositive_lambda_rejected(factory, lam):
    with pytest.raises(ValueError):
        factory(lam)


def test_small_lambda_is_flagged_not_refused():
    assert idata.gaussian(0.5).flags
    assert not idata.gaussian(1.0).flags


# ---------------------------------------------------------------- closed forms against grids


@pytest.mark.parametrize(
    "d",
    [
        idata.gaussian(1.0),
        idata.gaussian(4.0),
        idata.odd_gaussian(1.0),
        idata.odd_gaussian(2.0),
        idata.scaled(idata.odd_gaussian(1.0), 4),
        idata.scaled(idata.gaussian(1.0), 3),
    ],
    ids=lambda d: str(d.spec()),
)
def test_closed_forms_match_grid(d):
    f = idata.sample(d, G2048)
    assert sp.l2_norm(f) == pytest.approx(d.l2_norm, rel=1e-6)
    assert sp.linf_norm(sp.resample(f, 8 * 2048)) == pytest.approx(d.linf_norm, abs=1e-4)
    v, x = grid_inf(d, G2048)
    assert v == pytest.approx(d.inf_deriv, abs=1e-4)
    assert abs(x - d.argmin_deriv) <= 2 * G2048.dx


def test_l2_closed_form_against_quadrature():
    for d in [idata.gaussian(2.0), idata.odd_gaussian(0.7)]:
        val, _ = integrate.quad(lambda x: d(x) ** 2, -np.inf, np.inf, epsabs=1e-14)
        assert math.sqrt(val) == pytest.approx(d.l2_norm, rel=1e-12)


# ---------------------------------------------------------------- scaling


def test_scaled_identity_for_n_1():
    d = idata.gaussian(1.0)
    assert idata.scaled(d, 1) is d


def test_scaled_examples():
    d = idata.scaled(idata.odd_gaussian(1.0), 4)
    assert d.inf_deriv == -2.0
    assert d.l2_norm == pytest.approx(0.25 * 2**-1.25 * math.pi**0.25, rel=1e-15)
    val, _ = integrate.quad(lambda x: d(x) ** 2, -np.inf, np.inf, epsabs=1e-15)
    assert math.sqrt(val) == pytest.approx(d.l2_norm, rel=1e-10)


@given(
    st.sampled_from(["gaussian", "odd_gaussian"]),
    st.floats(1.0, 8.0),
    st.integers(1, 16),
    st.floats(-2.0, 2.0),
)
def test_scaling_identities(kind, lam, n, x0):
    base = idata.from_spec({"kind": kind, "lam": lam})
    d = idata.scaled(base, n)
    assert d.l2_norm == pytest.approx(base.l2_norm / n, rel=1e-10)
    assert d.linf_norm == pytest.approx(base.linf_norm / math.sqrt(n), rel=1e-10)
    assert d.derivative(x0 / n) == pytest.approx(math.sqrt(n) * base.derivative(x0), rel=1e-10, abs=1e-300)
    assert d.inf_deriv == pytest.approx(math.sqrt(n) * base.inf_deriv, rel=1e-10)


def test_scaled_rejects_bad_n():
    for n in [0, -2, 1.5]:
        with pytest.raises(ValueError):
            idata.scaled(idata.gaussian(1.0), n)


def test_scaled_gaussian_measured_inf():
    d = idata.scaled(idata.gaussian(1.0), 2)
    f = idata.sample(d, G2048)
    fine = sp.resample(sp.derivative(f), 4 * 2048)
    assert fine.values.min() == pytest.approx(d.inf_deriv, abs=1e-4)


# ---------------------------------------------------------------- sampling


def test_sample_boundary_values():
    f = idata.sample(idata.gaussian(1.0), Grid(20.0, 1024))
    assert abs(f.values[0]) < 1e-170


def test_sample_refuses_wide_data():
    with pytest.raises(TailToleranceError):
        idata.sample(idata.gaussian(1e-3), Grid(20.0, 1024))


def test_zero_datum():
    z = idata.zero()
    assert z.l2_norm == z.inf_deriv == 0.0
    assert np.all(idata.sample(z, Grid(5.0, 64)).values == 0)


# ---------------------------------------------------------------- custom data


def test_custom_round_trips_samples():
    g = Grid(10.0, 512)
    f = Field(g, np.exp(-(g.x**2)) * np.cos(g.x))
    d = idata.custom(f)
    assert idata.sample(d, g) is f
    assert d.analytics.exact is False
    assert np.allclose(d(g.x), f.values, atol=1e-14)


def test_custom_matches_closed_form_extrema():
    g = Grid(10.0, 512)
    ref = idata.odd_gaussian(1.0)
    d = idata.custom(idata.sample(ref, g))
    assert d.inf_deriv == pytest.approx(ref.inf_deriv, abs=1e-10)
    assert d.sup_deriv == pytest.approx(ref.sup_deriv, abs=1e-4)
    assert d.l2_norm == pytest.approx(ref.l2_norm, rel=1e-12)
    assert d.derivative(0.3) == pytest.approx(ref.derivative(0.3), abs=1e-12)


def test_custom_with_analytic_derivative():
    g = Grid(10.0, 256)
    ref = idata.gaussian(1.0)
    d = idata.custom(idata.sample(ref, g), derivative=ref.derivative)
    assert d.inf_deriv == pytest.approx(ref.inf_deriv, abs=1e-4)


def test_custom_rejects_non_finite():
    g = Grid(1.0, 16)
    v = np.zeros(16)
    v[0] = np.inf
    with pytest.raises(ValueError):
        idata.custom(Field(g, v))


def test_file_round_trip(tmp_path):
    g = Grid(10.0, 256)
    f = idata.sample(idata.odd_gaussian(1.0), g)
    path = tmp_path / "u0.txt"
    idata.save_custom(path, f)
    d = idata.load_custom(path)
    assert d.kind == "file"
    assert np.array_equal(idata.sample(d, g).values, f.values)
    again = idata.from_spec(d.spec())
    assert again.inf_deriv == d.inf_deriv


@pytest.mark.parametrize(
    "x",
    [
        np.linspace(-1, 1, 16, endpoint=False)[::-1],
        np.r_[np.linspace(-1, 0, 8, endpoint=False), np.linspace(0.05, 1, 8)],
        np.linspace(-1.5, 0.5, 16, endpoint=False),
    ],
    ids=["decreasing", "uneven", "offset"],
)
def test_file_format_validation(tmp_path, x):
    path = tmp_path / "bad.txt"
    np.savetxt(path, np.column_stack([x, np.zeros_like(x)]))
    with pytest.raises(ValueError):
        idata.load_custom(path)


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "gaussian", "lam": 2.0},
        {"kind": "odd_gaussian", "lam": 1.0},
        {"kind": "zero"},
        {"kind": "scaled", "n": 8, "base": {"kind": "odd_gaussian", "lam": 1.0}},
    ],
)
def test_spec_round_trip(spec):
    assert idata.from_spec(spec).spec() == spec


def test_unknown_kind():
    with pytest.raises(ValueError):
        idata.from_spec({"kind": "sech"})
