import numpy as np
import pytest
from scipy import stats as sps

from tilegen.density import (
    DensityModel,
    cauchy_density,
    exponential_density,
    from_table,
    gaussian_density,
    uniform_density,
)
from tilegen.errors import InternalError, ParameterError
from tilegen.gof import chi_square, kolmogorov_smirnov, truncated_cdf
from tilegen.sampler import SamplerState, merge_counters, sample_parallel
from tilegen.stable import bimodal_fig2
from tilegen.tiling import StopRule, _materialize, build
from tilegen.urng import UniformSource


def sigma_binom(p, n):
    return np.sqrt(p * (1 - p) / n)


@pytest.fixture(scope="module")
def gauss():
    m = gaussian_density()
    return m, build(m)


def test_fresh_counters(gauss):
    m, (t, _) = gauss
    assert tuple(SamplerState(t, m, 0).counters()) == (0, 0, 0, 0)


def test_uniform_never_evaluates():
    m = uniform_density()
    t, _ = build(m)
    s = SamplerState(t, m, UniformSource(3))
    before = m.eval_count
    x = s.draw_batch(10**5)
    assert tuple(s.counters()) == (10**5, 10**5, 0, 0)
    assert m.eval_count == before
    assert x.min() >= 0 and x.max() <= 1


def test_single_border_tile_half_acceptance():
    m = DensityModel(lambda x: np.full(np.shape(x), 0.5), 0, 1)
    t = _materialize(0.0, 1.0, 1, 1.0, 0.5, [1], [0])
    s = SamplerState(t, m, UniformSource(4))
    n = 10**6
    s.draw_batch(n)
    c = s.counters()
    acc = c.accepts / c.attempts
    assert abs(acc - 0.5) < 4 * sigma_binom(0.5, c.attempts)
    assert c.density_evals == c.attempts


def test_batch_equals_scalar_draws(gauss):
    m, (t, _) = gauss
    a = SamplerState(t, m, UniformSource(5))
    b = SamplerState(t, m, UniformSource(5))
    xa = a.draw_batch(100)
    xb = np.array([b.draw() for _ in range(100)])
    assert np.array_equal(xa, xb)
    assert a.counters() == b.counters()
    # mixing both interfaces keeps the stream intact
    c = SamplerState(t, m, UniformSource(5))
    xc = np.concatenate([c.draw_batch(37), [c.draw() for _ in range(13)], c.draw_batch(50)])
    assert np.array_equal(xa, xc)


def test_zero_and_negative_batch(gauss):
    m, (t, _) = gauss
    s = SamplerState(t, m, 0)
    assert s.draw_batch(0).size == 0
    with pytest.raises(ParameterError):
        s.draw_batch(-1)


def test_reproducible(gauss):
    m, (t, _) = gauss
    x1 = SamplerState(t, m, 7).draw_batch(1000)
    x2 = SamplerState(t, m, 7).draw_batch(1000)
    assert np.array_equal(x1, x2)


def test_rates_match_declared(gauss):
    m, (t, hist) = gauss
    s = SamplerState(t, m, UniformSource(6))
    before = m.eval_count
    s.draw_batch(10**6)
    c = s.counters()
    r, e = hist[-1].rejection_rate, hist[-1].evaluation_rate
    assert abs(c.rejections / c.attempts - r) < 4 * sigma_binom(r, c.attempts)
    assert abs(c.density_evals / c.attempts - e) < 4 * sigma_binom(e, c.attempts)
    assert m.eval_count - before == c.density_evals
    assert c.accepts + c.rejections == c.attempts


def test_variates_stay_in_support():
    m = cauchy_density()
    t, _ = build(m)
    x = SamplerState(t, m, 1).draw_batch(10**6)
    assert x.min() >= -64 and x.max() <= 64


def test_no_variates_in_jump_gap():
    xi = 0.5
    m = from_table([(0, 0.1), (xi, 0.1), (xi + 1e-12, 0.9), (1, 0.9)])
    t, _ = build(m)
    x = SamplerState(t, m, 2).draw_batch(10**6)
    assert not np.any((x > xi) & (x < xi + 1e-12))
    frac = np.mean(x < xi)
    assert abs(frac - 0.1) < 4 * sigma_binom(0.1, x.size)


def test_broken_table_raises():
    m = DensityModel(lambda x: np.zeros(np.shape(x)), 0, 1)
    t = _materialize(0.0, 1.0, 1, 1.0, 0.0, [1], [0])
    with pytest.raises(InternalError):
        SamplerState(t, m, 0).draw()


def test_support_mismatch():
    t, _ = build(uniform_density())
    with pytest.raises(ParameterError):
        SamplerState(t, uniform_density(0, 2), 0)


def test_parallel_deterministic(gauss):
    m, (t, _) = gauss
    src = UniformSource(9)
    x1, st1 = sample_parallel(t, m, 10001, src, threads=3)
    x2, _ = sample_parallel(t, m, 10001, UniformSource(9), threads=3)
    assert np.array_equal(x1, x2)
    parts = [SamplerState(t, m, src.fork_stream(k)).draw_batch(n) for k, n in enumerate((3334, 3334, 3333))]
    assert np.array_equal(x1, np.concatenate(parts))
    assert merge_counters(st1).accepts == 10001


def test_ks_truncated_cauchy():
    m = cauchy_density()
    t, _ = build(m)
    x = SamplerState(t, m, UniformSource(10)).draw_batch(10**6)
    rep = kolmogorov_smirnov(x, truncated_cdf("cauchy", -64, 64))
    assert rep.p_value > 0.001


@pytest.mark.parametrize(
    "make",
    [gaussian_density, exponential_density, cauchy_density, bimodal_fig2],
    ids=["gaussian", "exponential", "cauchy", "bimodal"],
)
def test_chi_square_five_seeds(make):
    m = make()
    t, _ = build(m)
    edges = np.linspace(m.a, m.b, 65)
    fails = 0
    for seed in range(5):
        x = SamplerState(t, m, UniformSource(100 + seed)).draw_batch(10**6)
        fails += chi_square(x, m, edges=edges).p_value <= 0.001
    assert fails <= 1


def test_mass_point_fraction():
    from tilegen.density import bessel_k0_density, integral

    m = bessel_k0_density(epsilon=1e-3)
    t, _ = build(m)
    p = m.mass_points[0].mass / integral(m)
    x = SamplerState(t, m, UniformSource(12)).draw_batch(10**6)
    frac = np.mean(np.abs(x) <= 1e-3)
    assert abs(frac - p) < 4 * sigma_binom(p, x.size)


def test_power_against_shifted_cdf(gauss):
    m, (t, _) = gauss
    x = SamplerState(t, m, 13).draw_batch(10**5)
    assert kolmogorov_smirnov(x, truncated_cdf("gaussian", -6, 6, shift=1.0)).p_value < 1e-6
    ks = sps.kstest(x, truncated_cdf("gaussian", -6, 6))
    assert ks.pvalue > 1e-4


def test_batch_equals_scalar_on_high_rejection_table():
    # level 1 on a heavy-tailed density: long rejection runs grow the window
    m = cauchy_density()
    t, hist = build(m, StopRule(target_r=None, max_level=1))
    assert hist[-1].rejection_rate > 0.9
    a = SamplerState(t, m, UniformSource(21))
    b = SamplerState(t, m, UniformSource(21))
    xa = a.draw_batch(300)
    xb = np.array([b.draw() for _ in range(300)])
    assert np.array_equal(xa, xb)
    assert a.counters() == b.counters()
    c = a.counters()
    r = hist[-1].rejection_rate
    assert abs(c.rejections / c.attempts - r) < 4 * sigma_binom(r, c.attempts)
