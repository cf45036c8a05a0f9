"""Goodness-of-fit checks for generated variates."""

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special, stats

from .density import integral
from .errors import ParameterError

MIN_SAMPLES = 1000
MIN_EXPECTED = 5.0


@dataclass
class GofReport:
    test: str
    statistic: float
    p_value: float
    n_samples: int
    n_bins: int = None

    def to_json(self):
        return json.dumps({k: v for k, v in asdict(self).items() if v is not None})


def _check_samples(x):
    x = np.asarray(x, dtype=float).ravel()
    if x.size < MIN_SAMPLES:
        raise ParameterError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    return x


def merge_bins(observed, expected, minimum=MIN_EXPECTED):
    """Merge neighbouring bins left to right until each expects ``minimum``."""
    obs_out, exp_out = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= minimum:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_out:
            obs_out[-1] += o_acc
            exp_out[-1] += e_acc
        else:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
    return np.array(obs_out), np.array(exp_out)


def bin_masses(model, edges):
    """Quadrature mass of ``model`` in each bin, normalized to sum to 1."""
    masses = np.array([integral(model, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
    return masses / masses.sum()


def chi_square(samples, model, n_bins=64, edges=None):
    """Chi-square test of ``samples`` against the density ``model``."""
    x = _check_samples(samples)
    if edges is None:
        edges = np.linspace(model.a, model.b, n_bins + 1)
    edges = np.asarray(edges, dtype=float)
    observed, _ = np.histogram(x, bins=edges)
    if observed.sum() != x.size:
        raise ParameterError("samples fall outside the binned range")
    expected = bin_masses(model, edges) * x.size
    obs, exp = merge_bins(observed, expected)
    res = stats.chisquare(obs, exp * obs.sum() / exp.sum())
    return GofReport("chi_square", float(res.statistic), float(res.pvalue), int(x.size), int(obs.size))


def two_sample_chi_square(x, y, edges):
    """Homogeneity test of two samples binned on common ``edges``."""
    hx, _ = np.histogram(_check_samples(x), bins=edges)
    hy, _ = np.histogram(_check_samples(y), bins=edges)
    keep = (hx + hy) > 0
    res = stats.chi2_contingency(np.vstack([hx[keep], hy[keep]]), correction=False)
    return GofReport("chi_square", float(res.statistic), float(res.pvalue), int(hx.sum()), int(keep.sum()))


def kolmogorov_smirnov(samples, cdf):
    x = _check_samples(samples)
    res = stats.kstest(x, cdf)
    return GofReport("kolmogorov_smirnov", float(res.statistic), float(res.pvalue), int(x.size))


def _truncate(cdf, a, b):
    lo, hi = cdf(a), cdf(b)
    return lambda t: np.clip((cdf(np.asarray(t, dtype=float)) - lo) / (hi - lo), 0.0, 1.0)


def truncated_cdf(name, a, b, shift=0.0, **params):
    """Closed-form CDF of a builtin law truncated to [a, b].

    ``shift`` moves the law to the right; a wrong shift is the usual
    power check for the tests above.
    """
    if name == "uniform":
        base = lambda t: t  # noqa: E731
    elif name == "gaussian":
        mu, sigma = params.get("mu", 0.0), params.get("sigma", 1.0)
        base = lambda t: special.ndtr((t - mu) / sigma)  # noqa: E731
    elif name == "exponential":
        rate = params.get("rate", 1.0)
        base = lambda t: -np.expm1(-rate * np.maximum(t, 0.0))  # noqa: E731
    elif name == "cauchy":
        gamma, delta = params.get("gamma", 1.0), params.get("delta", 0.0)
        base = lambda t: 0.5 + np.arctan((t - delta) / gamma) / np.pi  # noqa: E731
    else:
        raise ParameterError(f"no closed-form CDF for {name!r}")
    shifted = lambda t: base(np.asarray(t, dtype=float) - shift)  # noqa: E731
    return _truncate(shifted, a, b)
