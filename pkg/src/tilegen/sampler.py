"""Production stage: draw variates from a finished tiling.

One attempt picks a tile uniformly, places ``X`` uniformly inside it and
accepts at once if the tile is Interior. For a Border tile it draws ``Y``
inside the tile and accepts iff ``Y < f(X)``. A rejection restarts with a
fresh tile.

Proposals are generated in compiled chunks and buffered, in exactly the
order the scalar loop would consume the uniform stream, so ``draw_batch(n)``
and ``n`` calls of ``draw()`` return the same variates. ``f`` is evaluated
only for proposals that are certain to be consumed, except during long
rejection runs, where values computed ahead are cached with the proposal.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import InternalError, ParameterError
from .urng import as_source

MAX_REJECTION_STREAK = 10**6
_MIN_CHUNK = 4096
_MAX_CHUNK = 1 << 20
# rejection run length after which windows grow past the demand
_STREAK_WINDOW = 64


class Counters(NamedTuple):
    attempts: int
    accepts: int
    rejections: int
    density_evals: int


class SamplerState:
    """Single-owner sampler over a shared, read-only table."""

    def __init__(self, table, model, source=None):
        if table.n_tiles == 0:
            raise ParameterError("cannot sample from an empty table")
        if (model.a, model.b) != (table.a, table.b):
            raise ParameterError("table and density supports differ")
        self.table = table
        self.model = model
        self.source = as_source(source)
        self.attempts = 0
        self.accepts = 0
        self.density_evals = 0
        self.density_eval_seconds = 0.0
        self._streak = 0
        self._x_lo = np.ascontiguousarray(table.x_lo)
        self._y_lo = np.ascontiguousarray(table.y_lo)
        self._interior = np.ascontiguousarray(table.interior)
        self._xs = np.empty(0)
        self._ys = np.empty(0)
        self._border = np.empty(0, dtype=bool)
        self._fx = np.empty(0)
        self._pos = 0

    @property
    def rejections(self):
        return self.attempts - self.accepts

    def counters(self):
        return Counters(self.attempts, self.accepts, self.rejections, self.density_evals)

    def _refill(self, want):
        size = int(min(max(want, _MIN_CHUNK), _MAX_CHUNK))
        xs = np.empty(size)
        ys = np.empty(size)
        border = np.empty(size, dtype=np.bool_)
        t = self.table
        _kernels.propose(
            self.source.state, self.source.algorithm_id, self._x_lo, self._y_lo,
            self._interior, t.delta_x, t.delta_y, t.b, xs, ys, border,
        )
        self._xs, self._ys, self._border, self._pos = xs, ys, border, 0
        # f(X) of Border proposals, filled on demand; NaN = not evaluated yet
        self._fx = np.full(size, np.nan)

    def _window(self, needed):
        # each attempt yields at most one variate, so the next `needed`
        # proposals are certain to be consumed; during a rejection streak the
        # window grows, and proposals past the last needed accept go back
        if self._streak >= _STREAK_WINDOW:
            return max(needed, min(2 * self._streak, _MAX_CHUNK))
        return needed

    def _evaluate(self, lo, hi):
        border = self._border[lo:hi]
        fx = self._fx[lo:hi]
        todo = border & np.isnan(fx)
        if todo.any():
            t0 = time.perf_counter()
            fx[todo] = self.model.eval(self._xs[lo:hi][todo])
            self.density_eval_seconds += time.perf_counter() - t0

    def _note_streak(self, accepted):
        if accepted.any():
            self._streak = accepted.size - 1 - int(np.flatnonzero(accepted)[-1])
        else:
            self._streak += accepted.size
        if self._streak >= MAX_REJECTION_STREAK:
            raise InternalError(
                f"{MAX_REJECTION_STREAK} consecutive rejections; the table does not fit the density"
            )

    def draw_batch(self, n):
        """``n`` variates, identical to ``n`` successive :meth:`draw` calls."""
        n = int(n)
        if n < 0:
            raise ParameterError("n must be nonnegative")
        out = np.empty(n)
        filled = 0
        while filled < n:
            needed = n - filled
            w = self._window(needed)
            if self._pos >= self._xs.size:
                self._refill(w)
            lo = self._pos
            hi = min(lo + w, self._xs.size)
            self._evaluate(lo, hi)
            border = self._border[lo:hi]
            accepted = ~border
            accepted[border] = self._ys[lo:hi][border] < self._fx[lo:hi][border]
            if hi - lo > needed:
                # stop right after the last accept that is needed
                hits = np.flatnonzero(accepted)
                if hits.size >= needed:
                    hi = lo + int(hits[needed - 1]) + 1
                    border = border[: hi - lo]
                    accepted = accepted[: hi - lo]
            self._pos = hi
            self._note_streak(accepted)
            got = self._xs[lo:hi][accepted]
            out[filled:filled + got.size] = got
            filled += got.size
            self.attempts += hi - lo
            self.accepts += got.size
            self.density_evals += int(np.count_nonzero(border))
        return out

    def draw(self):
        return float(self.draw_batch(1)[0])

    def fork(self, stream_id):
        """Fresh state on an independent stream sharing this table."""
        return SamplerState(self.table, self.model, self.source.fork_stream(stream_id))


def merge_counters(states):
    return Counters(*(sum(c) for c in zip(*(s.counters() for s in states))))


def sample_parallel(table, model, n, source=None, threads=1):
    """``n`` variates from ``threads`` forked states, concatenated in stream order.

    Thread ``k`` draws its share from ``source.fork_stream(k)``; the result
    is deterministic for a given seed and thread count. Returns
    ``(variates, states)``.
    """
    source = as_source(source)
    threads = max(1, int(threads))
    if threads == 1:
        state = SamplerState(table, model, source)
        return state.draw_batch(n), [state]
    states = [SamplerState(table, model, source.fork_stream(k)) for k in range(threads)]
    shares = [n // threads + (k < n % threads) for k in range(threads)]
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(lambda sk: sk[0].draw_batch(sk[1]), zip(states, shares)))
    return np.concatenate(parts) if parts else np.empty(0), states
