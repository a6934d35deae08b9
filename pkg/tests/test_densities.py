import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from bandtoeplitz import DensityModel, density_cdf, density_moment, goe_density, gue_density, gue_moment
from bandtoeplitz.densities import (
    WaveFunctionTable,
    alpha_term,
    eps_integral,
    hermite,
    integrate,
    wave_function,
    wave_functions,
    write_density_csv,
)
from bandtoeplitz.errors import DegreeLimitError, QuadratureError
from bandtoeplitz.pairings import goe_moment

finite = st.floats(-30, 30, allow_nan=False)


def test_hermite_small_cases():
    assert hermite(0, 3.7) == 1.0
    assert hermite(2, 0.0) == -1.0
    assert hermite(3, 2.0) == 2.0


@pytest.mark.parametrize("j", range(0, 25))
def test_hermite_matches_series(j):
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(hermite(j, x), oracles.he(j, x), rtol=1e-10, atol=1e-8)


def test_degree_cap():
    hermite(200, 1.0)
    with pytest.raises(DegreeLimitError):
        hermite(201, 1.0)
    with pytest.raises(DegreeLimitError):
        wave_function(201, 0.0)


def test_wave_function_values():
    assert wave_function(1, 0.0) == 0.0
    assert wave_function(0, 0.0) == pytest.approx((2 * math.pi) ** -0.25, rel=1e-15)
    x = np.linspace(-4, 4, 9)
    for j in range(8):
        expect = np.exp(-x * x / 4) * oracles.he(j, x) / math.sqrt(math.sqrt(2 * math.pi) * math.factorial(j))
        np.testing.assert_allclose(wave_function(j, x), expect, rtol=1e-12, atol=1e-15)


def test_wave_functions_finite_far_out():
    x = np.linspace(-50, 50, 1001)
    assert np.all(np.isfinite(wave_functions(64, x)))
    assert np.all(np.isfinite(wave_functions(200, x)))


def test_orthonormality():
    x, w = np.polynomial.legendre.leggauss(400)
    x, w = 40 * x, 40 * w
    psi = wave_functions(10, x)
    gram = (psi * w) @ psi.T
    np.testing.assert_allclose(gram, np.eye(11), atol=1e-12)
    assert oracles.psi_inner(3, 3) == pytest.approx(1.0, abs=1e-12)


def test_table_shape():
    tab = WaveFunctionTable(5)
    assert tab(np.zeros(3)).shape == (6, 3)


@given(j=st.integers(0, 40), x=finite)
def test_wave_parity(j, x):
    a, b = wave_function(j, x), wave_function(j, -x)
    assert a == pytest.approx((-1) ** j * b, rel=1e-12, abs=1e-300)


def test_gue_density_m1_is_normal():
    x = np.array([0.0, 1.0, -1.0, 2.0, -2.0])
    np.testing.assert_allclose(gue_density(1, x), np.exp(-x * x / 2) / math.sqrt(2 * math.pi), rtol=1e-14)


def test_gue_density_m2_at_zero():
    assert gue_density(2, 0.0) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-14)


@given(m=st.integers(1, 64), x=finite)
def test_gue_density_even_nonnegative(m, x):
    assert gue_density(m, x) >= 0
    assert gue_density(m, x) == pytest.approx(gue_density(m, -x), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("m", range(1, 9))
def test_gue_mass_and_moments(m):
    model = DensityModel(m)
    assert density_moment(model, 0) == pytest.approx(1.0, abs=1e-12)
    for k in (2, 4, 6):
        assert density_moment(model, k) == pytest.approx(oracles.gue_density_moment(m, k), abs=1e-10)
    assert density_moment(model, 4) == pytest.approx(float(gue_moment(m, 4)), abs=1e-10)


def test_moment_order_cap():
    with pytest.raises(DegreeLimitError):
        density_moment(DensityModel(2), 17)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 7])
def test_eps_integral_matches_erf_recurrence(m):
    x = np.linspace(-6, 6, 49)
    np.testing.assert_allclose(eps_integral(m, x), oracles.eps_integral(m, x), atol=1e-12)


def test_eps_integral_reports_residual():
    with pytest.raises(QuadratureError) as info:
        eps_integral(3, 0.5, tol=0.0)
    assert info.value.residual is not None


def test_integrate_flags_unresolved_integrand():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.sin(400 * x) ** 2, 0, 40, nodes=64)


@pytest.mark.parametrize("m", [2, 4, 6])
def test_alpha_vanishes_for_even_m(m):
    assert np.all(alpha_term(m, np.linspace(-3, 3, 7)) == 0.0)


@pytest.mark.parametrize("m", [1, 3, 5])
def test_alpha_mass_is_one_over_m(m):
    assert integrate(lambda x: alpha_term(m, x), -16, 16) == pytest.approx(1 / m, abs=1e-12)


@given(m=st.integers(1, 8), x=st.floats(-5, 5))
@settings(max_examples=40, deadline=None)
def test_goe_density_even(m, x):
    assert goe_density(m, x) == pytest.approx(goe_density(m, -x), rel=1e-9, abs=1e-12)


def test_goe_expression_mass_m1():
    # for m = 1 the sign-kernel integral is -2 psi_0, so the cross term has mass -sqrt(2) * scale
    assert DensityModel(1, "GOE").moment(0) == pytest.approx(2 - math.sqrt(2), abs=1e-10)
    assert DensityModel(1, "GOE", cross_scale=1 / math.sqrt(2)).moment(0) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("m", range(1, 7))
def test_goe_scaled_cross_term_reproduces_exact_moments(m):
    model = DensityModel(m, "GOE", cross_scale=1 / math.sqrt(2))
    for k in (0, 2, 4):
        assert model.moment(k) == pytest.approx(float(goe_moment(m, k)), abs=1e-9)


def test_goe_expression_as_written_second_moment():
    # the moment is affine in the cross-term scale: 1 + c * X, and c = 1/sqrt 2 gives 3/2
    model = DensityModel(2, "GOE")
    assert model.moment(2) == pytest.approx(1 + 1 / math.sqrt(2), abs=1e-9)


@pytest.mark.parametrize("m", [1, 2, 5])
def test_cdf_monotone_limits(m):
    model = DensityModel(m)
    x = np.linspace(-20, 20, 2001)
    c = density_cdf(model, x)
    assert np.all(np.diff(c) >= 0)
    assert c[0] == 0.0
    assert c[-1] == pytest.approx(1.0, abs=1e-10)
    assert model.cdf(0.0) == pytest.approx(0.5, abs=1e-12)


def test_cdf_matches_normal_for_m1():
    from scipy.special import ndtr

    x = np.linspace(-4, 4, 81)
    np.testing.assert_allclose(DensityModel(1).cdf(x), ndtr(x), atol=1e-9)


def test_density_model_validation():
    with pytest.raises(ValueError):
        DensityModel(0)
    with pytest.raises(DegreeLimitError):
        DensityModel(65)
    with pytest.raises(ValueError):
        DensityModel(2, "GSE")


def test_write_density_csv():
    buf = io.StringIO()
    x, pdf, cdf = DensityModel(1).grid(-1, 1, 3)
    write_density_csv(buf, x, pdf, cdf, header=["m=1"])
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# m=1"
    assert lines[1] == "x,pdf,cdf"
    assert len(lines) == 5


@given(m=st.integers(1, 12), a=st.floats(-20, 20), b=st.floats(-20, 20))
@settings(max_examples=60, deadline=None)
def test_cdf_monotone_property(m, a, b):
    lo, hi = min(a, b), max(a, b)
    model = DensityModel(m)
    assert model.cdf(lo) <= model.cdf(hi)
