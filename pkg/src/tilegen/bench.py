"""Throughput measurement.

Time spent inside density evaluations is measured separately and
subtracted, so the reported rate is that of the sampling machinery itself.
With ``interleave`` a cache-thrashing sweep over a large buffer runs between
batches, the way a simulation would use the generator in practice.
"""

import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from .sampler import SamplerState
from .tiling import StopRule, build


@dataclass
class BenchReport:
    variates_per_second: float
    raw_variates_per_second: float
    n_variates: int
    sample_seconds: float
    density_eval_seconds: float
    setup_seconds: float = 0.0
    setup_eval_seconds: float = 0.0
    interleaved: bool = False

    def to_json(self):
        return json.dumps(asdict(self))


def _thrash(buf):
    # touch every cache line with a read-modify-write
    buf[::8] += 1.0


def time_setup(model, stop=None):
    """Build a table and report ``(table, history, total_s, eval_s)``."""
    before = model.eval_seconds
    t0 = time.perf_counter()
    table, history = build(model, stop or StopRule())
    total = time.perf_counter() - t0
    return table, history, total, model.eval_seconds - before


def run(table, model, n=10**7, source=0, batch=2**16, interleave=False,
        interleave_bytes=64 * 2**20, warmup=2**14):
    """Draw ``n`` variates in batches and time them."""
    state = SamplerState(table, model, source)
    state.draw_batch(warmup)
    state.density_eval_seconds = 0.0
    buf = np.zeros(interleave_bytes // 8) if interleave else None
    thrash_s = 0.0
    done = 0
    t0 = time.perf_counter()
    while done < n:
        k = min(batch, n - done)
        state.draw_batch(k)
        done += k
        if buf is not None:
            t1 = time.perf_counter()
            _thrash(buf)
            thrash_s += time.perf_counter() - t1
    elapsed = time.perf_counter() - t0 - thrash_s
    eval_s = state.density_eval_seconds
    net = max(elapsed - eval_s, 1e-12)
    return BenchReport(
        variates_per_second=n / net,
        raw_variates_per_second=n / max(elapsed, 1e-12),
        n_variates=int(n),
        sample_seconds=elapsed,
        density_eval_seconds=eval_s,
        interleaved=bool(interleave),
    )
