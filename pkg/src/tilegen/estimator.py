"""scikit-learn style front end."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .density import DensityModel, from_table, integral
from .sampler import SamplerState
from .tiling import StopRule, build
from .urng import DEFAULT_ALGORITHM, UniformSource, as_source


class TilingSampler(BaseEstimator):
    """Rejection sampler over an equal-tile covering of a density.

    Parameters
    ----------
    target_rejection : float or None
        Refine until the rejection rate is at most this.
    target_evaluation : float or None
        Or until the evaluation rate is at most this.
    max_level : int
        Deepest refinement level.
    memory_cap : int
        Serialized table size limit in bytes.
    samples_per_column : int
        Density evaluations per column when bounding ``f``.
    support : (float, float) or None
        Support for a bare callable passed to :meth:`fit`.
    random_state : int or None
        Seed of the uniform source.
    rng : str
        Uniform generator name.

    Attributes
    ----------
    density_ : DensityModel
    tiling_ : TilingTable
    stats_ : list of RefinementStats
    total_integral_ : float
    """

    def __init__(self, target_rejection=0.02, target_evaluation=None, max_level=26,
                 memory_cap=64 * 2**20, samples_per_column=2, support=None,
                 random_state=None, rng=DEFAULT_ALGORITHM):
        self.target_rejection = target_rejection
        self.target_evaluation = target_evaluation
        self.max_level = max_level
        self.memory_cap = memory_cap
        self.samples_per_column = samples_per_column
        self.support = support
        self.random_state = random_state
        self.rng = rng

    def _as_model(self, X):
        if isinstance(X, DensityModel):
            return X
        if callable(X):
            if self.support is None:
                raise ValueError("support=(a, b) is required when fitting a callable")
            a, b = self.support
            return DensityModel(X, float(a), float(b))
        pts = check_array(X, ensure_min_samples=2, ensure_all_finite=True)
        if pts.shape[1] != 2:
            raise ValueError(f"expected (n, 2) table of (x, f(x)), got shape {pts.shape}")
        return from_table(pts)

    def fit(self, X, y=None):
        """Tile the density ``X``.

        ``X`` is a :class:`DensityModel`, a vectorized callable (with
        ``support`` set) or an ``(n, 2)`` array of ``(x, f(x))`` pairs.
        """
        if self.samples_per_column < 1:
            raise ValueError("samples_per_column must be >= 1")
        model = self._as_model(X)
        stop = StopRule(self.target_rejection, self.target_evaluation, self.max_level, self.memory_cap)
        self.density_ = model
        self.tiling_, self.stats_ = build(model, stop, samples_per_column=self.samples_per_column)
        self.total_integral_ = self.tiling_.total_integral
        self._state = SamplerState(self.tiling_, model, self._source(self.random_state))
        return self

    def _source(self, random_state):
        if isinstance(random_state, UniformSource):
            return random_state
        return as_source(random_state, self.rng)

    def sample(self, n_samples=1, random_state=None):
        """Draw ``n_samples`` variates as a 1-D array.

        Without ``random_state`` the fitted stream continues; otherwise a
        fresh stream is started from it.
        """
        check_is_fitted(self, "tiling_")
        state = self._state
        if random_state is not None:
            state = SamplerState(self.tiling_, self.density_, self._source(random_state))
        return state.draw_batch(n_samples)

    def score_samples(self, X):
        """Log of the normalized density at the points ``X``."""
        check_is_fitted(self, "tiling_")
        x = check_array(np.reshape(np.asarray(X, dtype=float), (-1, 1)), ensure_all_finite=True).ravel()
        inside = (x >= self.density_.a) & (x <= self.density_.b)
        out = np.full(x.shape, -np.inf)
        with np.errstate(divide="ignore"):
            out[inside] = np.log(self.density_.eval(x[inside]) / self.total_integral_)
        return out

    @property
    def counters_(self):
        check_is_fitted(self, "tiling_")
        return self._state.counters()

    def mass(self, lo, hi):
        """Probability of [lo, hi] under the fitted density."""
        check_is_fitted(self, "tiling_")
        return integral(self.density_, lo, hi) / self.total_integral_
