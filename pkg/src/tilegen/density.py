"""Target densities on a finite support.

A :class:`DensityModel` wraps a vectorized nonnegative function on [a, b].
It counts every point it evaluates (``eval_count``) and the wall time spent
doing so (``eval_seconds``); the tiler and the sampler rely on both.

Poles are handled by declaring mass points: on [c - eps, c + eps] the raw
density is replaced by the constant plateau that carries the same mass.
"""

import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidTable, NonFiniteDensity, QuadratureFailure
from .quadrature import integrate as _integrate

DEFAULT_RTOL = 1e-9
# smallest spacing allowed between consecutive table abscissae, in ulps
MIN_NODE_ULPS = 4


@dataclass(frozen=True)
class MassPoint:
    c: float
    epsilon: float
    plateau: float
    mass: float
    # raw density at c - eps and c + eps, folded into column bounds
    edge_values: tuple = (0.0, 0.0)

    @property
    def lo(self):
        return self.c - self.epsilon

    @property
    def hi(self):
        return self.c + self.epsilon


class DensityModel:
    """Pointwise-computable density ``f`` on [a, b].

    Parameters
    ----------
    func : callable
        Vectorized map from an array of abscissae to density values. It need
        not be normalized.
    a, b : float
        Finite support with ``a < b``.
    name : str
        Label used in reports.
    breakpoints : sequence of float
        Abscissae where ``f`` or its derivatives jump; quadrature splits
        there.
    """

    kind = "closed_form"
    piecewise_linear = False

    def __init__(self, func, a, b, name="custom", breakpoints=(), mass_points=()):
        a = float(a)
        b = float(b)
        if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
            raise DomainError(f"support must be a finite interval with a < b, got [{a}, {b}]")
        self._func = func
        self.a = a
        self.b = b
        self.name = name
        self._breakpoints = tuple(float(p) for p in breakpoints)
        self.mass_points = tuple(mass_points)
        self.eval_count = 0
        self.eval_seconds = 0.0
        self._lock = threading.Lock()

    def __repr__(self):
        extra = "".join(f", mass_point(c={m.c}, eps={m.epsilon})" for m in self.mass_points)
        return f"{type(self).__name__}({self.name!r}, [{self.a}, {self.b}]{extra})"

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def breakpoints(self):
        pts = list(self._breakpoints)
        for m in self.mass_points:
            pts.extend([m.lo, m.c, m.hi])
        return np.unique(np.asarray(pts, dtype=float))

    def raw(self, x):
        """Unmodified density values, uncounted and unchecked."""
        return np.asarray(self._func(x), dtype=float)

    def eval(self, x):
        """Density at ``x`` with mass-point plateaus applied.

        Every evaluated point increments ``eval_count``.
        """
        scalar = np.ndim(x) == 0
        x = np.asarray(x, dtype=float)
        if x.size and (x.min() < self.a or x.max() > self.b):
            raise DomainError(f"abscissa outside the support [{self.a}, {self.b}]")
        t0 = time.perf_counter()
        if self.mass_points:
            y = np.empty(x.shape)
            outside = np.ones(x.shape, dtype=bool)
            for m in self.mass_points:
                inside = np.abs(x - m.c) <= m.epsilon
                y[inside] = m.plateau
                outside &= ~inside
            if outside.any():
                y[outside] = self.raw(x[outside])
        else:
            y = self.raw(x)
        elapsed = time.perf_counter() - t0
        with self._lock:
            self.eval_count += x.size
            self.eval_seconds += elapsed
        if not np.all(np.isfinite(y)):
            bad = x[~np.isfinite(y)].ravel()[0]
            raise NonFiniteDensity(
                f"density is not finite at x={bad!r}; declare a mass point around it"
            )
        if np.any(y < 0):
            raise NonFiniteDensity("density returned a negative value")
        return float(y) if scalar else y

    __call__ = eval

    def _derive(self, func, name, mass_points=None, breakpoints=None):
        other = DensityModel(
            func,
            self.a,
            self.b,
            name=name,
            breakpoints=self._breakpoints if breakpoints is None else breakpoints,
            mass_points=self.mass_points if mass_points is None else mass_points,
        )
        return other

    def with_mass_point(self, c, epsilon, rtol=1e-11):
        return declare_mass_point(self, c, epsilon, rtol=rtol)

    def scaled(self, k):
        """Density multiplied by ``k > 0``; mass points scale with it."""
        if not k > 0:
            raise DomainError("scale factor must be positive")
        mps = tuple(
            MassPoint(m.c, m.epsilon, k * m.plateau, k * m.mass, tuple(k * v for v in m.edge_values))
            for m in self.mass_points
        )
        other = self._derive(lambda x: k * self.raw(x), f"{k}*{self.name}", mass_points=mps)
        other.piecewise_linear = self.piecewise_linear
        other._fold_nodes = getattr(self, "_fold_nodes", None)
        if other._fold_nodes is not None:
            other._fold_nodes = (other._fold_nodes[0], k * other._fold_nodes[1])
        return other

    def slowed(self, factor):
        """Same density, but every evaluation repeats the work ``factor`` times."""
        factor = int(factor)

        def slow(x):
            y = None
            for _ in range(factor):
                y = self.raw(x)
            return y

        other = self._derive(slow, f"slow{factor}x-{self.name}")
        other.piecewise_linear = self.piecewise_linear
        other._fold_nodes = getattr(self, "_fold_nodes", None)
        return other


class TabularDensity(DensityModel):
    """Density interpolated from ``(x_i, f(x_i))`` pairs.

    ``interpolation`` is ``"linear"`` or ``"polynomial"``; the latter uses a
    local Lagrange polynomial through ``order + 1`` neighbouring nodes and
    clamps negative overshoot to zero.
    """

    kind = "tabular"

    def __init__(self, x, y, interpolation="linear", order=6, name="table", mass_points=()):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        _validate_table(x, y)
        if interpolation not in ("linear", "polynomial"):
            raise InvalidTable(f"unknown interpolation {interpolation!r}")
        if interpolation == "polynomial" and not 1 <= order < x.size:
            raise InvalidTable(f"polynomial order {order} needs at least {order + 1} points")
        self.x = x
        self.y = y
        self.interpolation = interpolation
        self.order = int(order)
        self.piecewise_linear = interpolation == "linear"
        self._fold_nodes = (x, y)
        func = self._linear if self.piecewise_linear else self._polynomial
        super().__init__(func, x[0], x[-1], name=name, breakpoints=x, mass_points=mass_points)

    @property
    def points(self):
        return np.column_stack([self.x, self.y])

    def _linear(self, t):
        return np.interp(t, self.x, self.y)

    def _polynomial(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        p = self.order + 1
        i = np.clip(np.searchsorted(self.x, flat, side="right") - 1, 0, self.x.size - 2)
        start = np.clip(i - (p - 1) // 2, 0, self.x.size - p)
        idx = start[:, None] + np.arange(p)[None, :]
        xn = self.x[idx]
        yn = self.y[idx]
        out = np.zeros(flat.shape)
        diff = flat[:, None] - xn
        for j in range(p):
            w = np.ones(flat.shape)
            for m in range(p):
                if m != j:
                    w *= diff[:, m] / (xn[:, j] - xn[:, m])
            out += w * yn[:, j]
        return np.maximum(out, 0.0).reshape(t.shape)

    def _derive(self, func, name, mass_points=None, breakpoints=None):
        other = super()._derive(func, name, mass_points, breakpoints)
        other.kind = "tabular"
        return other

    def with_mass_points(self, mass_points):
        return TabularDensity(
            self.x, self.y, self.interpolation, self.order, self.name, tuple(mass_points)
        )


def _validate_table(x, y):
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise InvalidTable("table needs two equally long 1-D columns")
    if x.size < 2:
        raise InvalidTable("table needs at least 2 points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidTable("table contains non-finite values")
    if np.any(y < 0):
        raise InvalidTable("table contains negative density values")
    dx = np.diff(x)
    if np.any(dx <= 0):
        raise InvalidTable("abscissae must be strictly increasing (no duplicates)")
    ulp = np.spacing(np.maximum(np.abs(x[:-1]), np.abs(x[1:])))
    if np.any(dx < MIN_NODE_ULPS * ulp):
        raise InvalidTable(f"consecutive abscissae closer than {MIN_NODE_ULPS} ulps")


def from_table(points, interpolation="linear", order=6, name="table"):
    """Build a :class:`TabularDensity` from an ``(n, 2)`` array of pairs."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidTable("points must be an (n, 2) array of (x, f(x)) pairs")
    return TabularDensity(pts[:, 0], pts[:, 1], interpolation, order, name)


def load_table_csv(path, interpolation="linear", order=6):
    """Read a two-column ``x,f(x)`` CSV; ``#`` comments and a header are skipped."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.replace(";", ",").split(",") if p.strip()]
            if len(parts) != 2:
                raise InvalidTable(f"expected two columns, got {line!r}")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                if rows:
                    raise InvalidTable(f"non-numeric row {line!r}") from None
                # header line
    return from_table(np.array(rows, dtype=float).reshape(-1, 2), interpolation, order, name=str(path))


def _pole_mass(raw, c, epsilon, rtol, breakpoints):
    # x = c +- s**2 turns |x - c|**(-1/2) and log poles into smooth
    # integrands and keeps the nodes away from c in floating point
    root = np.sqrt(epsilon)
    inner = [np.sqrt(abs(p - c)) for p in breakpoints if 0 < abs(p - c) < epsilon]
    total = 0.0
    for sign in (1.0, -1.0):
        def g(s, sign=sign):
            return 2.0 * s * raw(c + sign * s * s)
        total += _integrate(g, 0.0, root, rtol=rtol, points=inner)
    return total


def declare_mass_point(model, c, epsilon, rtol=1e-11):
    """Replace ``f`` on [c - eps, c + eps] by its mean value there.

    The plateau height is ``(1 / 2 eps) * integral of f over the interval``,
    so the interval keeps its probability mass.
    """
    c = float(c)
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if c - epsilon < model.a or c + epsilon > model.b:
        raise DomainError(f"[{c - epsilon}, {c + epsilon}] is not inside the support")
    for m in model.mass_points:
        if c - epsilon <= m.hi and m.lo <= c + epsilon:
            raise DomainError("mass-point intervals must not overlap")
    raw = model.raw
    try:
        mass = _pole_mass(raw, c, epsilon, rtol, model.breakpoints)
    except QuadratureFailure as exc:
        raise QuadratureFailure(f"density is not integrable around c={c}: {exc}") from exc
    edges = tuple(float(v) for v in raw(np.array([c - epsilon, c + epsilon])))
    mp = MassPoint(c, epsilon, mass / (2 * epsilon), mass, edges)
    if isinstance(model, TabularDensity) and model._func in (model._linear, model._polynomial):
        return model.with_mass_points(model.mass_points + (mp,))
    other = model._derive(model._func, model.name, mass_points=model.mass_points + (mp,))
    other.piecewise_linear = model.piecewise_linear
    other._fold_nodes = getattr(model, "_fold_nodes", None)
    return other


def integral(model, lo=None, hi=None, rtol=DEFAULT_RTOL):
    """Adaptive quadrature of the (modified) density over [lo, hi]."""
    lo = model.a if lo is None else float(lo)
    hi = model.b if hi is None else float(hi)
    if lo < model.a or hi > model.b or lo > hi:
        raise DomainError(f"[{lo}, {hi}] is not inside the support")
    return _integrate(model.eval, lo, hi, rtol=rtol, points=model.breakpoints)


@dataclass
class GridProfile:
    """Per-column evidence for tile classification at one resolution."""

    a: float
    b: float
    lower: np.ndarray
    upper: np.ndarray
    column_integral: np.ndarray
    evaluations: int = 0
    samples: np.ndarray = field(default=None, repr=False)

    @property
    def n(self):
        return self.lower.size

    @property
    def total_integral(self):
        return float(self.column_integral.sum())

    @property
    def global_max(self):
        return float(self.upper.max())

    @property
    def width(self):
        return (self.b - self.a) / self.n

    def coarsen(self, n):
        """Bounds for ``n`` columns, ``n`` a divisor of ``self.n``."""
        if self.n % n:
            raise ValueError(f"{n} does not divide {self.n}")
        g = self.n // n
        return GridProfile(
            self.a,
            self.b,
            self.lower.reshape(n, g).min(axis=1),
            self.upper.reshape(n, g).max(axis=1),
            self.column_integral.reshape(n, g).sum(axis=1),
            self.evaluations,
        )


def profile(model, n_columns, samples_per_column=2):
    """Sample ``f`` on ``n_columns`` equal columns of the support.

    Each column is sampled at ``samples_per_column + 1`` equally spaced
    points including both endpoints; neighbours share endpoints, so the
    model sees exactly ``n_columns * samples_per_column + 1`` evaluations.
    With the default of 2 that is both endpoints plus the midpoint.

    Bounds are exact for densities monotone within each column. Elsewhere
    they are widened without extra evaluations: interior extrema of the
    samples are replaced by the vertex of the parabola through the three
    neighbouring samples, tabular nodes are folded in, and mass-point
    plateaus and their edge values are folded into every column they touch.
    Column integrals use the composite trapezoid rule on the same samples.
    """
    n = int(n_columns)
    s = int(samples_per_column)
    if n < 1 or s < 1:
        raise ValueError("n_columns and samples_per_column must be positive")
    a, b = model.a, model.b
    m = n * s
    xs = a + (b - a) * (np.arange(m + 1) / m)
    xs[-1] = b
    v = model.eval(xs)
    grid = np.empty((n, s + 1))
    grid[:, :s] = v[:-1].reshape(n, s)
    grid[:, s] = v[s::s]
    upper = grid.max(axis=1)
    lower = grid.min(axis=1)
    h = (b - a) / m
    col_int = h * (0.5 * grid[:, 0] + grid[:, 1:s].sum(axis=1) + 0.5 * grid[:, s])
    width = (b - a) / n

    if not model.piecewise_linear and v.size >= 3:
        _fold_vertices(v, h, s, upper, lower)
    nodes = getattr(model, "_fold_nodes", None)
    if nodes is not None:
        _fold_points(nodes[0], nodes[1], a, width, upper, lower, only_upper=False)
    for mp in model.mass_points:
        j0 = _column_of(mp.lo, a, width, n)
        j1 = _column_of(mp.hi, a, width, n)
        upper[j0:j1 + 1] = np.maximum(upper[j0:j1 + 1], mp.plateau)
        lower[j0:j1 + 1] = np.minimum(lower[j0:j1 + 1], mp.plateau)
        _fold_points(np.array([mp.lo, mp.hi]), np.array(mp.edge_values), a, width, upper, lower)
    np.maximum(lower, 0.0, out=lower)
    return GridProfile(a, b, lower, upper, col_int, evaluations=v.size, samples=v)


def _column_of(x, a, width, n):
    return int(min(max(np.floor((x - a) / width), 0), n - 1))


def _fold_points(px, py, a, width, upper, lower, only_upper=False):
    n = upper.size
    pos = (np.asarray(px) - a) / width
    j = np.clip(np.floor(pos).astype(np.int64), 0, n - 1)
    np.maximum.at(upper, j, py)
    if not only_upper:
        np.minimum.at(lower, j, py)
    # nodes on a column boundary belong to both neighbours
    on_edge = (pos == np.floor(pos)) & (j > 0) & (j <= n - 1)
    if np.any(on_edge):
        np.maximum.at(upper, j[on_edge] - 1, np.asarray(py)[on_edge])
        if not only_upper:
            np.minimum.at(lower, j[on_edge] - 1, np.asarray(py)[on_edge])


def _fold_vertices(v, h, s, upper, lower):
    n = upper.size
    f0, f1, f2 = v[:-2], v[1:-1], v[2:]
    curv = f0 - 2.0 * f1 + f2
    cap = np.abs(f1 - f0) + np.abs(f1 - f2)
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = (f0 - f2) / (2.0 * curv)
        vertex = f1 - (f0 - f2) ** 2 / (8.0 * curv)
    centre = np.arange(1, v.size - 1, dtype=float)
    peak = ((f1 > f0) & (f1 >= f2) | (f1 >= f0) & (f1 > f2)) & (curv < 0)
    trough = ((f1 < f0) & (f1 <= f2) | (f1 <= f0) & (f1 < f2)) & (curv > 0)
    for mask, sign in ((peak, 1.0), (trough, -1.0)):
        k = np.nonzero(mask)[0]
        if k.size == 0:
            continue
        val = np.clip(vertex[k], f1[k] - cap[k], f1[k] + cap[k])
        pos = centre[k] + np.clip(shift[k], -1.0, 1.0)
        # the vertex location is uncertain by a fraction of a sample spacing
        for p in (pos - 0.25, pos + 0.25):
            cols = np.clip(np.floor(p / s).astype(np.int64), 0, n - 1)
            if sign > 0:
                np.maximum.at(upper, cols, val)
            else:
                np.minimum.at(lower, cols, val)


# built-in closed forms

def uniform_density(a=0.0, b=1.0, height=1.0):
    return DensityModel(lambda x: np.full(np.shape(x), float(height)), a, b, name="uniform")


def gaussian_density(mu=0.0, sigma=1.0, a=-6.0, b=6.0):
    norm = 1.0 / (sigma * np.sqrt(2.0 * np.pi))
    return DensityModel(
        lambda x: norm * np.exp(-0.5 * ((np.asarray(x) - mu) / sigma) ** 2), a, b, name="gaussian"
    )


def exponential_density(rate=1.0, a=0.0, b=10.0):
    if a < 0:
        raise DomainError("exponential support must start at x >= 0")
    return DensityModel(lambda x: rate * np.exp(-rate * np.asarray(x)), a, b, name="exponential")


def cauchy_density(gamma=1.0, a=-64.0, b=64.0, delta=0.0):
    return DensityModel(
        lambda x: gamma / (np.pi * (gamma**2 + (np.asarray(x) - delta) ** 2)), a, b, name="cauchy"
    )


def bessel_k0_density(a=-15.0, b=15.0, epsilon=None):
    """Density ``K0(|x|) / pi`` of the product of two standard normals.

    ``K0`` diverges logarithmically at 0, so a mass point around 0 is
    needed before the density can be tiled; pass ``epsilon`` to declare it.
    """
    from scipy.special import k0

    def f(x):
        with np.errstate(divide="ignore"):
            return k0(np.abs(np.asarray(x, dtype=float))) / np.pi

    model = DensityModel(f, a, b, name="bessel-k0", breakpoints=[0.0] if a < 0 < b else [])
    if epsilon:
        model = declare_mass_point(model, 0.0, epsilon)
    return model
