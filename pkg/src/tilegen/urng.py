"""Seedable uniform random sources.

A :class:`UniformSource` wraps a 64-bit generator whose output stream is a
pure function of ``(algorithm, seed, stream_id)``. The bit-exact mappings are

* ``unit_real``: ``(raw >> 11) * 2**-53``, so values lie on the 2**-53 grid
  in [0, 1) and 1.0 is never returned;
* ``uniform_index(n)``: the high word of the 128-bit product ``raw * n``,
  rejecting raw words whose low word falls below ``(2**64 - n) mod n``.

The default algorithm is xoshiro256** (period 2**256 - 1). Streams forked
from one seed are spaced 2**128 draws apart with the generator's jump
polynomial, so they cannot overlap within 2**64 draws. The alternative
``xorshift64*`` (period 2**64 - 1) forks by reseeding and gives no such
guarantee.
"""

import numpy as np

from . import _kernels
from .errors import ParameterError

ALGORITHMS = {"xoshiro256**": 0, "xorshift64*": 1}
DEFAULT_ALGORITHM = "xoshiro256**"

_MASK64 = (1 << 64) - 1


def splitmix64(x):
    """Return ``(next_state, output)`` of the SplitMix64 sequence."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


def _seed_state(seed, algorithm, stream_id):
    x = int(seed) & _MASK64
    words = []
    if algorithm == "xoshiro256**":
        for _ in range(4):
            x, z = splitmix64(x)
            words.append(z)
        state = np.array(words, dtype=np.uint64)
        for _ in range(stream_id):
            _kernels.xoshiro_jump(state)
        return state
    # xorshift64*: mix the stream id into the seed; state must be nonzero
    x ^= (stream_id * 0xD1B54A32D192ED03) & _MASK64
    z = 0
    while z == 0:
        x, z = splitmix64(x)
    return np.array([z, 0, 0, 0], dtype=np.uint64)


def bounded_from_raw(raw, n, bits=64):
    """Reference bounded-index map for a ``bits``-wide raw word.

    Returns the index in [0, n), or ``None`` when the raw word is rejected.
    The compiled kernels implement the ``bits=64`` case of this map.
    """
    m = raw * n
    low = m & ((1 << bits) - 1)
    if low < ((1 << bits) - n) % n:
        return None
    return m >> bits


class UniformSource:
    """Single-owner uniform generator.

    Parameters
    ----------
    seed : int
        64-bit seed.
    algorithm : str
        ``"xoshiro256**"`` (default) or ``"xorshift64*"``.
    stream_id : int
        Independent stream index; stream ``k`` of a seed is what
        ``UniformSource(seed).fork_stream(k - 1)`` returns.
    """

    def __init__(self, seed=0, algorithm=DEFAULT_ALGORITHM, stream_id=0):
        if algorithm not in ALGORITHMS:
            raise ParameterError(
                f"unknown generator {algorithm!r}; choose from {sorted(ALGORITHMS)}"
            )
        if stream_id < 0:
            raise ParameterError("stream_id must be nonnegative")
        self.seed = int(seed) & _MASK64
        self.algorithm = algorithm
        self.algorithm_id = ALGORITHMS[algorithm]
        self.stream_id = int(stream_id)
        self.state = _seed_state(self.seed, algorithm, self.stream_id)

    def __repr__(self):
        return (
            f"UniformSource(seed={self.seed}, algorithm={self.algorithm!r}, "
            f"stream_id={self.stream_id})"
        )

    def copy(self):
        other = object.__new__(UniformSource)
        other.__dict__.update(self.__dict__)
        other.state = self.state.copy()
        return other

    def raw(self, size=None):
        """Next raw 64-bit word(s)."""
        if size is None:
            return int(_kernels.raw_scalar(self.state, self.algorithm_id))
        out = np.empty(size, dtype=np.uint64)
        _kernels.fill_raw(self.state, self.algorithm_id, out)
        return out

    def unit_real(self, size=None):
        """Uniform deviate(s) in [0, 1)."""
        if size is None:
            return float(_kernels.unit_scalar(self.state, self.algorithm_id))
        out = np.empty(size, dtype=np.float64)
        _kernels.fill_unit(self.state, self.algorithm_id, out)
        return out

    def uniform_index(self, n, size=None):
        """Unbiased integer(s) in [0, n) for ``1 <= n <= 2**63``."""
        n = int(n)
        if not 1 <= n <= 2**63:
            raise ParameterError("uniform_index needs 1 <= n <= 2**63")
        if size is None:
            return int(_kernels.bounded_scalar(self.state, self.algorithm_id, n))
        out = np.empty(size, dtype=np.int64)
        _kernels.fill_bounded(self.state, self.algorithm_id, n, out)
        return out

    def fork_stream(self, stream_id):
        """Independent source for stream ``stream_id`` of this seed.

        Depends only on the seed, algorithm and ``stream_id``; the parent's
        current position is irrelevant.
        """
        if stream_id < 0:
            raise ParameterError("stream_id must be nonnegative")
        return UniformSource(self.seed, self.algorithm, self.stream_id + stream_id + 1)


def unit_real(source):
    return source.unit_real()


def uniform_index(source, n):
    return source.uniform_index(n)


def fork_stream(source, stream_id):
    return source.fork_stream(stream_id)


def as_source(random_state=None, algorithm=DEFAULT_ALGORITHM):
    """Coerce ``None``, an int seed or a :class:`UniformSource`."""
    if isinstance(random_state, UniformSource):
        return random_state
    if random_state is None:
        random_state = int.from_bytes(np.random.default_rng().bytes(8), "little")
    return UniformSource(int(random_state), algorithm)
