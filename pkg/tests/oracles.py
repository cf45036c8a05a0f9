"""Reference values computed independently of the package under test."""

import functools

import numpy as np
from scipy import stats
from scipy.interpolate import PchipInterpolator

from tilegen.quadrature import integrate
from tilegen.stable import symmetric_levy_pdf


@functools.lru_cache(maxsize=None)
def _stable_cdf_table(alpha, gamma):
    # CDF on an asinh-spaced grid; |x| > 1e6 carries < 1e-8 of the mass for alpha >= 1
    u = np.linspace(np.arcsinh(-1e6), np.arcsinh(1e6), 4097)
    x = np.sinh(u)
    cdf = stats.levy_stable.cdf(x, alpha, 0.0, scale=gamma)
    return u, np.maximum.accumulate(cdf)


def symmetric_stable_cdf(alpha, gamma=1.0):
    """CDF of the symmetric stable law via scipy, as a fast interpolant."""
    if alpha == 2:
        return stats.norm(scale=gamma * np.sqrt(2)).cdf
    if alpha == 1:
        return stats.cauchy(scale=gamma).cdf
    u, cdf = _stable_cdf_table(float(alpha), float(gamma))
    interp = PchipInterpolator(u, cdf, extrapolate=False)

    def cdf_fn(x):
        v = interp(np.arcsinh(np.asarray(x, dtype=float)))
        x = np.asarray(x)
        return np.where(np.isnan(v), (x > 0).astype(float), v)

    return cdf_fn


def stable_bin_masses(alpha, edges, gamma=1.0):
    """Masses of the bins ``edges`` plus two tails, from pointwise-density quadrature."""
    inner = np.array([
        integrate(lambda t: symmetric_levy_pdf(t, alpha, gamma), lo, hi, rtol=1e-10)
        for lo, hi in zip(edges[:-1], edges[1:])
    ])
    tail = (1.0 - inner.sum()) / 2
    return np.concatenate([[tail], inner, [tail]])


def trunc_cauchy_cdf(a, b, gamma=1.0):
    base = stats.cauchy(scale=gamma).cdf
    lo, hi = base(a), base(b)
    return lambda x: (base(x) - lo) / (hi - lo)
