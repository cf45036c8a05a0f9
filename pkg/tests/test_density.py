import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from tilegen.density import (
    DensityModel,
    bessel_k0_density,
    cauchy_density,
    declare_mass_point,
    exponential_density,
    from_table,
    gaussian_density,
    integral,
    load_table_csv,
    profile,
    uniform_density,
)
from tilegen.errors import DomainError, InvalidTable, NonFiniteDensity, QuadratureFailure
from tilegen.quadrature import adaptive_gk, integrate as gk_integrate


def test_uniform_eval():
    assert uniform_density().eval(0.3) == 1.0


def test_cauchy_eval_at_mode():
    assert cauchy_density().eval(0.0) == pytest.approx(1 / math.pi, rel=1e-15)


def test_eval_outside_support():
    with pytest.raises(DomainError):
        uniform_density().eval(1.5)


def test_eval_count_per_point():
    m = gaussian_density()
    m.eval(0.0)
    m.eval(np.zeros(10))
    assert m.eval_count == 11


def test_nonfinite_density_reported():
    m = DensityModel(lambda x: 1 / np.abs(np.asarray(x)), -1, 1)
    with pytest.raises(NonFiniteDensity):
        m.eval(0.0)


def test_negative_density_reported():
    m = DensityModel(lambda x: np.asarray(x), -1, 1)
    with pytest.raises(NonFiniteDensity):
        m.eval(-0.5)


def test_support_must_be_finite():
    with pytest.raises(DomainError):
        DensityModel(lambda x: x, 0, np.inf)
    with pytest.raises(DomainError):
        DensityModel(lambda x: x, 1, 0)


def test_table_uniform():
    m = from_table([(0, 1), (1, 1)])
    assert m.support == (0.0, 1.0)
    assert m.eval(0.7) == 1.0


def test_table_linear_midpoint():
    assert from_table([(0, 0), (1, 2)]).eval(0.5) == 1.0


@pytest.mark.parametrize(
    "pts",
    [
        [(0, 1)],
        [(1, 1), (0, 1)],
        [(0, 1), (0, 2), (1, 1)],
        [(0, -1), (1, 1)],
        [(0, np.nan), (1, 1)],
    ],
)
def test_invalid_tables(pts):
    with pytest.raises(InvalidTable):
        from_table(pts)


def test_table_nodes_too_close():
    with pytest.raises(InvalidTable):
        from_table([(0, 1), (1.0, 1), (1.0 + 2e-16, 1), (2, 1)])


def test_jump_table():
    xi = 0.5
    m = from_table([(0, 0.1), (xi, 0.1), (xi + 1e-12, 0.9), (1, 0.9)])
    assert m.eval(0.25) == pytest.approx(0.1)
    assert m.eval(0.75) == pytest.approx(0.9)
    assert integral(m) == pytest.approx(0.5, abs=1e-11)


def test_polynomial_interpolation_is_clamped():
    x = np.linspace(0, 1, 15)
    y = np.where(x < 0.5, 0.0, 1.0)
    m = from_table(np.c_[x, y], interpolation="polynomial", order=6)
    probe = np.linspace(0, 1, 1001)
    assert np.all(m.eval(probe) >= 0)


def test_polynomial_interpolation_exact_for_polynomials():
    x = np.linspace(-1, 1, 41)
    y = 2 + x**3 - 0.5 * x**6
    m = from_table(np.c_[x, y], interpolation="polynomial", order=6)
    t = np.linspace(-1, 1, 333)
    assert np.allclose(m.eval(t), 2 + t**3 - 0.5 * t**6, atol=1e-12)


def test_csv_loader(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("# my density\nx,f\n0,0\n1,2\n")
    m = load_table_csv(p)
    assert m.eval(0.25) == 0.5


def test_csv_loader_rejects_junk(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("0,0\nfoo,2\n")
    with pytest.raises(InvalidTable):
        load_table_csv(p)


def test_integral_uniform_and_scaled():
    assert integral(uniform_density()) == pytest.approx(1.0, rel=1e-12)
    assert integral(uniform_density(height=2.0)) == pytest.approx(2.0, rel=1e-12)


def test_integral_gaussian():
    assert integral(gaussian_density()) == pytest.approx(special.erf(6 / math.sqrt(2)), abs=1e-9)


def test_integral_matches_scipy_quad():
    m = cauchy_density(a=-64, b=64)
    ref = integrate.quad(lambda t: 1 / (math.pi * (1 + t * t)), -64, 64, limit=200)[0]
    assert integral(m) == pytest.approx(ref, rel=1e-9)


def test_integral_bounds_checked():
    with pytest.raises(DomainError):
        integral(uniform_density(), -1, 0.5)


def test_quadrature_endpoint_singularity():
    # int_0^1 x^(-1/2) = 2
    val, err = adaptive_gk(lambda x: 1 / np.sqrt(x), [0.0, 1.0], rtol=1e-10)
    assert val == pytest.approx(2.0, rel=1e-9)


def test_quadrature_failure():
    with pytest.raises(QuadratureFailure):
        gk_integrate(lambda x: 1 / np.abs(x), -1, 1, points=[0.0], max_intervals=1000)


def test_mass_point_constant_density():
    m = declare_mass_point(uniform_density(0, 1, 3.0), 0.5, 0.1)
    assert m.mass_points[0].plateau == pytest.approx(3.0, rel=1e-12)


def test_mass_point_inverse_sqrt_cusp():
    # f = |x - c|^(-1/2): each side integrates to 2 sqrt(eps)
    c, eps = 0.3, 1e-4
    m = DensityModel(lambda x: np.abs(np.asarray(x) - c) ** -0.5, -1, 1, breakpoints=[c])
    m = declare_mass_point(m, c, eps)
    mp = m.mass_points[0]
    assert mp.mass == pytest.approx(4 * math.sqrt(eps), rel=1e-9)
    assert mp.plateau == pytest.approx(2 / math.sqrt(eps), rel=1e-9)
    assert m.eval(c) == mp.plateau


def test_bessel_mass_fraction():
    m = bessel_k0_density(epsilon=1e-5)
    mp = m.mass_points[0]
    assert mp.mass / integral(m) == pytest.approx(8.03978e-5, rel=1e-5)
    # int_0^e K0 = e (1 - gamma_E - log(e/2)) + O(e^3 log e)
    e = 1e-5
    series = 2 * e * (1 - np.euler_gamma - math.log(e / 2)) / math.pi
    assert mp.mass == pytest.approx(series, rel=1e-8)


def test_mass_point_preserves_mass():
    raw = bessel_k0_density()
    m = declare_mass_point(raw, 0.0, 1e-3)
    assert integral(m) == pytest.approx(integral(m, -15, -1e-3) * 2 + m.mass_points[0].mass, rel=1e-9)


def test_mass_point_checks():
    with pytest.raises(DomainError):
        declare_mass_point(uniform_density(), 0.0, 0.1)
    with pytest.raises(DomainError):
        declare_mass_point(uniform_density(), 0.5, 0.0)
    m = declare_mass_point(uniform_density(), 0.5, 0.1)
    with pytest.raises(DomainError):
        declare_mass_point(m, 0.55, 0.1)


def test_profile_uniform():
    m = uniform_density()
    p = profile(m, 4)
    assert np.all(p.lower == 1) and np.all(p.upper == 1)
    assert np.allclose(p.column_integral, 0.25)
    assert m.eval_count == 4 * 2 + 1


@pytest.mark.parametrize("s", [1, 2, 5])
def test_profile_eval_count(s):
    m = gaussian_density()
    profile(m, 16, s)
    assert m.eval_count == 16 * s + 1


def test_profile_linear_integrals():
    m = DensityModel(lambda x: 2 * np.asarray(x), 0, 1)
    p = profile(m, 2, samples_per_column=64)
    assert np.allclose(p.column_integral, [0.25, 0.75], atol=1e-6)
    assert p.total_integral == pytest.approx(1.0, abs=1e-6)


def test_profile_cauchy_total():
    p = profile(cauchy_density(), 2**14)
    assert p.total_integral == pytest.approx(2 * math.atan(64) / math.pi, rel=1e-6)


def test_profile_coarsen_consistent():
    m = gaussian_density()
    fine = profile(m, 64)
    coarse = fine.coarsen(8)
    assert np.allclose(coarse.column_integral, fine.column_integral.reshape(8, 8).sum(1))
    assert np.all(coarse.upper == fine.upper.reshape(8, 8).max(1))
    assert np.all(coarse.lower == fine.lower.reshape(8, 8).min(1))


@pytest.mark.parametrize(
    "model",
    [gaussian_density(), cauchy_density(), exponential_density(), bessel_k0_density(epsilon=1e-3)],
    ids=["gaussian", "cauchy", "exponential", "bessel"],
)
def test_profile_soundness(model):
    n = 256
    p = profile(model, n)
    x = np.random.default_rng(0).uniform(model.a, model.b, 10**4)
    col = np.clip(((x - model.a) / p.width).astype(int), 0, n - 1)
    f = model.eval(x)
    slack = 1e-12
    assert np.all(f <= p.upper[col] + slack)
    assert np.all(f >= p.lower[col] - slack)


def test_profile_soundness_polynomial_table():
    x = np.linspace(-3, 3, 61)
    m = from_table(np.c_[x, np.exp(-x * x)], interpolation="polynomial")
    n = 64
    p = profile(m, n)
    t = np.random.default_rng(1).uniform(-3, 3, 10**4)
    col = np.clip(((t + 3) / p.width).astype(int), 0, n - 1)
    f = m.eval(t)
    assert np.all(f <= p.upper[col] + 1e-12)
    assert np.all(f >= p.lower[col] - 1e-12)


@settings(max_examples=25, deadline=None)
@given(k=st.floats(0.01, 100))
def test_profile_scale_invariance(k):
    m = gaussian_density()
    p1 = profile(m, 32)
    p2 = profile(m.scaled(k), 32)
    assert np.allclose(p2.upper, k * p1.upper, rtol=1e-12)
    assert np.allclose(p2.lower, k * p1.lower, rtol=1e-12)
    assert np.allclose(p2.column_integral, k * p1.column_integral, rtol=1e-12)


def test_slowed_density_same_values():
    m = gaussian_density()
    x = np.linspace(-6, 6, 11)
    assert np.array_equal(m.slowed(5).eval(x), m.eval(x))
