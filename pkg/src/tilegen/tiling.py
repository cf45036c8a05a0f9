"""Equal-tile covering of a density.

Setup starts from one tile ``b - a`` wide and ``max f`` high and splits
every tile into four congruent children per refinement cycle. Children
lying entirely above ``f`` are discarded; children lying entirely below it
are labelled Interior and accept proposals without evaluating ``f``.

Because ``f >= 0`` and a tile is kept iff its bottom edge is below the
column's upper bound of ``f``, the tiles of every column form a contiguous
stack starting at row 0, with the Interior tiles at its base. A table is
therefore fully described by per-column tile and Interior counts; the flat
``(col, row, label)`` arrays are materialized from them.
"""

import logging
import math
import struct
import zlib
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .density import integral, profile
from .errors import DegenerateDensity, FormatError, MemoryBudgetExceeded

logger = logging.getLogger(__name__)

# serialized bytes per tile: u32 column + u32 row with the label in its top bit
TILE_BYTES = 8
MAGIC = b"TILE"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHddIddQ")
_LABEL_BIT = np.uint32(1 << 31)

DEFAULT_SAMPLES_PER_COLUMN = 2
DEFAULT_BASE_COLUMNS = 4096


class Label(IntEnum):
    BORDER = 0
    INTERIOR = 1


class Tile(NamedTuple):
    col: int
    row: int
    label: Label


@dataclass(frozen=True, eq=False)
class TilingTable:
    """Immutable product of setup.

    Tile ``i`` spans ``[a + cols[i] dx, a + (cols[i] + 1) dx]`` horizontally
    and ``[rows[i] dy, (rows[i] + 1) dy]`` vertically, with
    ``dx = (b - a) / 2**(level - 1)`` and ``dy = height / 2**(level - 1)``.
    """

    a: float
    b: float
    level: int
    height: float
    total_integral: float
    cols: np.ndarray
    rows: np.ndarray
    interior: np.ndarray

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def n_columns(self):
        return 1 << (self.level - 1)

    @property
    def delta_x(self):
        return (self.b - self.a) / self.n_columns

    @property
    def delta_y(self):
        return self.height / self.n_columns

    @property
    def tile_area(self):
        return self.delta_x * self.delta_y

    @property
    def n_tiles(self):
        return int(self.cols.size)

    @property
    def n_interior(self):
        return int(np.count_nonzero(self.interior))

    def __len__(self):
        return self.n_tiles

    def tile(self, i):
        return Tile(int(self.cols[i]), int(self.rows[i]), Label(int(self.interior[i])))

    def tiles(self):
        for i in range(self.n_tiles):
            yield self.tile(i)

    @cached_property
    def x_lo(self):
        return self.a + self.cols.astype(np.float64) * self.delta_x

    @cached_property
    def y_lo(self):
        return self.rows.astype(np.float64) * self.delta_y

    @cached_property
    def column_counts(self):
        """``(tiles, interior)`` count per column."""
        n = self.n_columns
        k = np.bincount(self.cols, minlength=n)
        m = np.bincount(self.cols[self.interior], minlength=n)
        return k, m

    def column_of(self, x):
        x = np.asarray(x, dtype=float)
        j = np.floor((x - self.a) / self.delta_x).astype(np.int64)
        return np.clip(j, 0, self.n_columns - 1)

    def envelope(self, x):
        """Majorizing step function: top of the tile stack above ``x``."""
        k, _ = self.column_counts
        top = np.zeros(self.n_columns)
        cols, rows = self.cols, self.rows
        np.maximum.at(top, cols, (rows + 1).astype(float))
        return top[self.column_of(x)] * self.delta_y

    def squeeze(self, x):
        """Minorizing step function: top of the Interior tiles above ``x``."""
        _, m = self.column_counts
        return m[self.column_of(x)] * self.delta_y

    def structurally_equal(self, other):
        return (
            self.level == other.level
            and self.n_tiles == other.n_tiles
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.interior, other.interior)
        )

    def __eq__(self, other):
        if not isinstance(other, TilingTable):
            return NotImplemented
        return (
            self.structurally_equal(other)
            and self.a == other.a
            and self.b == other.b
            and self.height == other.height
            and self.total_integral == other.total_integral
        )

    __hash__ = None


@dataclass(frozen=True)
class RefinementStats:
    level: int
    n_tiles: int
    rejection_rate: float
    evaluation_rate: float
    memory_bytes: int

    def as_row(self):
        return (self.level, self.n_tiles, self.rejection_rate, self.evaluation_rate, self.memory_bytes)


@dataclass(frozen=True)
class StopRule:
    """Refinement stops at the first satisfied bound.

    Exceeding ``memory_cap`` (serialized bytes) before any other bound is
    met raises :class:`MemoryBudgetExceeded`.
    """

    target_r: float = 0.02
    target_e: float = None
    max_level: int = 26
    memory_cap: int = 64 * 2**20

    def __post_init__(self):
        if self.target_r is None and self.target_e is None and self.max_level is None:
            raise ValueError("StopRule needs at least one bound")
        if self.max_level is not None and self.max_level < 1:
            raise ValueError("max_level must be >= 1")

    def satisfied(self, st):
        if self.target_r is not None and st.rejection_rate <= self.target_r:
            return True
        if self.target_e is not None and st.evaluation_rate <= self.target_e:
            return True
        return self.max_level is not None and st.level >= self.max_level


class ColumnBounds:
    """Per-column bounds of ``f`` at any power-of-two column count.

    Coarse resolutions are aggregated from one base profile with
    ``base_columns`` columns; finer ones are profiled directly.
    """

    def __init__(self, model, samples_per_column=DEFAULT_SAMPLES_PER_COLUMN,
                 base_columns=DEFAULT_BASE_COLUMNS):
        if base_columns & (base_columns - 1):
            raise ValueError("base_columns must be a power of two")
        self.model = model
        self.samples_per_column = samples_per_column
        self.base_columns = base_columns
        self._cache = {}

    def profile(self, n):
        if n in self._cache:
            return self._cache[n]
        if n <= self.base_columns:
            base = self._cache.get(self.base_columns)
            if base is None:
                base = profile(self.model, self.base_columns, self.samples_per_column)
                self._cache[self.base_columns] = base
            prof = base.coarsen(n)
        else:
            prof = profile(self.model, n, self.samples_per_column)
        self._cache[n] = prof
        return prof

    def __call__(self, n):
        p = self.profile(n)
        return p.lower, p.upper


def estimate_global_max(model, bounds):
    """Upper estimate of ``max f`` from the base profile plus a local polish."""
    prof = bounds.profile(bounds.base_columns)
    best = float(prof.upper.max())
    if model.piecewise_linear:
        return best
    width = prof.width
    for j in np.argsort(prof.upper)[-3:]:
        lo = max(model.a, model.a + (j - 1) * width)
        hi = min(model.b, model.a + (j + 2) * width)
        res = minimize_scalar(
            lambda t: -model.eval(t), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-10 * (model.b - model.a)},
        )
        if res.success:
            best = max(best, float(-res.fun))
    return best


def _materialize(a, b, level, height, total, k, m):
    k = np.asarray(k, dtype=np.int64)
    m = np.minimum(np.asarray(m, dtype=np.int64), k)
    n_tiles = int(k.sum())
    cols = np.repeat(np.arange(k.size, dtype=np.uint32), k)
    starts = np.cumsum(k) - k
    rows = (np.arange(n_tiles, dtype=np.int64) - np.repeat(starts, k)).astype(np.uint32)
    interior = rows < np.repeat(m, k)
    return TilingTable(float(a), float(b), int(level), float(height), float(total), cols, rows, interior)


def _stack_counts(lower, upper, height, level):
    # rows per column whose bottom lies below upper / whose top lies at or below lower
    scale = (1 << (level - 1)) / height
    need = np.ceil(upper * scale).astype(np.int64)
    inner = np.floor(lower * scale).astype(np.int64)
    return need, np.maximum(inner, 0)


def initial_tile(model, samples_per_column=DEFAULT_SAMPLES_PER_COLUMN,
                 base_columns=DEFAULT_BASE_COLUMNS, bounds=None, total_integral=None):
    """Level-1 table: one tile ``[a, b] x [0, max f]``."""
    bounds = bounds or ColumnBounds(model, samples_per_column, base_columns)
    height = estimate_global_max(model, bounds)
    if not height > 0:
        raise DegenerateDensity("density is zero everywhere on its support")
    total = integral(model) if total_integral is None else total_integral
    lower, _ = bounds(1)
    interior = 1 if lower[0] >= height else 0
    return _materialize(model.a, model.b, 1, height, total, [1], [interior])


def refine(table, model, bounds=None, memory_cap=None):
    """Split every tile into four; drop children above ``f``; relabel.

    A child is discarded when its bottom is at or above the column's upper
    bound of ``f`` and labelled Interior when its top is at or below the
    column's lower bound. If finer sampling reveals ``f`` above a stack that
    an earlier, coarser cycle had trimmed, the missing tiles are regrown so
    the covering stays majorizing.
    """
    bounds = bounds or ColumnBounds(model)
    level = table.level + 1
    lower, upper = bounds(1 << (level - 1))
    need, inner = _stack_counts(lower, upper, table.height, level)
    parent_k, _ = table.column_counts
    split_k = 2 * np.repeat(parent_k, 2)
    k = np.minimum(split_k, need)
    regrow = need > split_k
    if np.any(regrow):
        logger.warning("level %d: regrew tiles in %d columns", level, int(regrow.sum()))
        k = np.where(regrow, need, k)
    n_next = int(k.sum())
    if memory_cap is not None and n_next * TILE_BYTES > memory_cap:
        raise MemoryBudgetExceeded(
            f"level {level} needs {n_next} tiles ({n_next * TILE_BYTES} bytes) "
            f"> cap {memory_cap} bytes",
            table,
        )
    return _materialize(table.a, table.b, level, table.height, table.total_integral, k, inner)


def stats(table, model=None):
    """Rejection rate R and evaluation rate E of a table.

    ``R = 1 - C / (N S)`` with ``C`` the density integral, and ``E`` the
    Border-tile share of the tiles (the probability that a proposal has to
    evaluate ``f``).
    """
    total = table.total_integral if model is None else integral(model)
    n = table.n_tiles
    if n == 0:
        return RefinementStats(table.level, 0, float("nan"), float("nan"), 0)
    covered = n * table.tile_area
    r = max(0.0, 1.0 - total / covered)
    e = (n - table.n_interior) / n
    return RefinementStats(table.level, n, r, e, n * TILE_BYTES)


def build(model, stop=None, samples_per_column=DEFAULT_SAMPLES_PER_COLUMN,
          base_columns=DEFAULT_BASE_COLUMNS):
    """Refine until ``stop`` is satisfied.

    Returns ``(table, history)`` where ``history`` lists the statistics of
    every level from 1 to the final one.
    """
    stop = stop or StopRule()
    bounds = ColumnBounds(model, samples_per_column, base_columns)
    table = initial_tile(model, bounds=bounds)
    history = [stats(table)]
    while not stop.satisfied(history[-1]):
        try:
            table = refine(table, model, bounds, memory_cap=stop.memory_cap)
        except MemoryBudgetExceeded as exc:
            raise MemoryBudgetExceeded(str(exc), table, history) from None
        history.append(stats(table))
        logger.debug("level %d: N=%d R=%.4f E=%.4f", *history[-1].as_row()[:4])
    return table, history


def tile_count(model, level, height, samples_per_column=DEFAULT_SAMPLES_PER_COLUMN,
               bounds=None):
    """Number of tiles a table of ``level`` would retain, without building it."""
    bounds = bounds or ColumnBounds(model, samples_per_column)
    lower, upper = bounds(1 << (level - 1))
    need, _ = _stack_counts(lower, upper, height, level)
    return int(need.sum())


def refinements_for_width(support_width, width):
    """Refinement cycles until columns are at most ``width`` wide."""
    return math.ceil(math.log2(support_width / width))


def eval_density_bound(table, model, x):
    """Density of f-evaluations along x, normalized to the evaluation rate.

    Proportional to ``dx * |d log f / dx|`` with the derivative taken by
    central differences at the table's column width; scaled so that its
    integral over the support equals E. Zero where ``f`` vanishes.
    """
    dx = table.delta_x
    a, b = table.a, table.b
    e_rate = stats(table).evaluation_rate

    def raw_shape(t):
        t = np.asarray(t, dtype=float)
        lo = np.clip(t - 0.5 * dx, a, b)
        hi = np.clip(t + 0.5 * dx, a, b)
        f_lo, f_mid, f_hi = model.eval(lo), model.eval(t), model.eval(hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = (np.log(f_hi) - np.log(f_lo)) / (hi - lo)
        d = np.where((f_lo > 0) & (f_hi > 0) & (f_mid > 0) & np.isfinite(d), d, 0.0)
        return dx * np.abs(d)

    grid = np.linspace(a, b, 8 * table.n_columns + 1) if table.n_columns < 4096 else np.linspace(a, b, 32769)
    shape_grid = raw_shape(grid)
    norm = np.trapezoid(shape_grid, grid)
    out = raw_shape(x)
    if norm <= 0:
        return np.zeros_like(out) if np.ndim(x) else 0.0
    out = out * (e_rate / norm)
    return out if np.ndim(x) else float(out)


def serialize(table):
    """Little-endian byte image of a table with trailing CRC32."""
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, table.a, table.b, table.level, table.height,
        table.total_integral, table.n_tiles,
    )
    rec = np.empty((table.n_tiles, 2), dtype="<u4")
    rec[:, 0] = table.cols
    rec[:, 1] = table.rows | np.where(table.interior, _LABEL_BIT, np.uint32(0))
    body = header + rec.tobytes()
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def deserialize(data):
    """Inverse of :func:`serialize`; validates structure and invariants."""
    data = bytes(data)
    if len(data) < _HEADER.size + 4:
        raise FormatError("truncated table: header incomplete")
    magic, version, a, b, level, height, total, n_tiles = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    expected = _HEADER.size + TILE_BYTES * n_tiles + 4
    if len(data) != expected:
        raise FormatError(f"truncated or oversized table: {len(data)} bytes, expected {expected}")
    (crc,) = struct.unpack_from("<I", data, expected - 4)
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != crc:
        raise FormatError("checksum mismatch")
    if not (np.isfinite(a) and np.isfinite(b) and a < b and level >= 1 and height > 0):
        raise FormatError("invalid table geometry")
    rec = np.frombuffer(data, dtype="<u4", count=2 * n_tiles, offset=_HEADER.size).reshape(-1, 2)
    cols = rec[:, 0].astype(np.uint32)
    interior = (rec[:, 1] & _LABEL_BIT) != 0
    rows = (rec[:, 1] & ~_LABEL_BIT).astype(np.uint32)
    n_columns = 1 << (level - 1)
    if n_tiles and int(cols.max()) >= n_columns:
        raise FormatError("tile column outside the support")
    key = np.sort((cols.astype(np.uint64) << np.uint64(32)) | rows.astype(np.uint64))
    if np.any(np.diff(key) == 0):
        raise FormatError("duplicate (col, row) tile")
    table = TilingTable(a, b, level, height, total, cols, rows, interior)
    if n_tiles * table.tile_area < total * (1 - 1e-9):
        raise FormatError("tiles cover less area than the declared density integral")
    return table


def save_table(table, path):
    with open(path, "wb") as fh:
        fh.write(serialize(table))


def load_table(path):
    with open(path, "rb") as fh:
        return deserialize(fh.read())
