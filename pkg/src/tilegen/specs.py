"""Textual density descriptions used by the command line and table metadata.

Grammar::

    builtin:<name>[:k=v,k=v,...]
    table:<path>[:linear|polynomial[<order>]]

A trailing ``slow=<factor>`` parameter on a builtin repeats each evaluation
``factor`` times (benchmarking aid). Mass points are declared separately as
``c=<real>,eps=<real>``.
"""

from . import density as dens
from . import stable
from .errors import SpecError


def _levy(alpha=1.0, beta=0.0, gamma=1.0, delta=0.0, a=-64.0, b=64.0, n=2**15, interp="linear"):
    params = stable.StableParams(alpha, beta, gamma, delta)
    return stable.levy_pdf_grid(params, int(n), (a, b), interpolation=interp)


def _bimodal(n=2**15, a=-5.0, b=25.0, junction=10.0, right_location=stable.BIMODAL_RIGHT_LOCATION,
             interp="linear"):
    return stable.bimodal_fig2(int(n), (a, b), junction, right_location, interpolation=interp)


def _bessel(a=-15.0, b=15.0, eps=1e-5):
    return dens.bessel_k0_density(a, b, epsilon=eps if eps > 0 else None)


BUILTINS = {
    "uniform": dens.uniform_density,
    "gaussian": lambda mu=0.0, sigma=1.0, a=-6.0, b=6.0: dens.gaussian_density(mu, sigma, a, b),
    "exponential": lambda rate=1.0, a=0.0, b=10.0: dens.exponential_density(rate, a, b),
    "cauchy": lambda gamma=1.0, a=-64.0, b=64.0, delta=0.0: dens.cauchy_density(gamma, a, b, delta),
    "levy": _levy,
    "bimodal-fig2": _bimodal,
    "bessel-k0": _bessel,
}

_STRING_PARAMS = {"interp"}


def parse_params(text):
    out = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise SpecError(f"expected key=value, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        if key in _STRING_PARAMS:
            out[key] = val
            continue
        try:
            out[key] = float(val)
        except ValueError:
            raise SpecError(f"parameter {key!r} needs a number, got {val!r}") from None
    return out


def _interpolation(text):
    text = (text or "linear").strip().lower()
    if text == "linear":
        return "linear", 6
    if text.startswith("polynomial"):
        rest = text[len("polynomial"):]
        return "polynomial", int(rest) if rest else 6
    raise SpecError(f"unknown interpolation {text!r}")


def parse_density(spec, mass_points=()):
    """Density model described by ``spec``, with optional mass points."""
    kind, _, rest = spec.partition(":")
    if kind == "builtin":
        name, _, params = rest.partition(":")
        if name not in BUILTINS:
            raise SpecError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
        kw = parse_params(params)
        slow = kw.pop("slow", None)
        try:
            model = BUILTINS[name](**kw)
        except TypeError as exc:
            raise SpecError(f"bad parameters for {name}: {exc}") from None
        if slow and slow > 1:
            model = model.slowed(int(slow))
    elif kind == "table":
        path, sep, interp = rest.rpartition(":")
        if not sep or not path:
            path, interp = rest, "linear"
        method, order = _interpolation(interp)
        model = dens.load_table_csv(path, method, order)
    else:
        raise SpecError(f"density spec must start with builtin: or table:, got {spec!r}")
    for mp in mass_points:
        kw = parse_params(mp) if isinstance(mp, str) else dict(mp)
        try:
            model = dens.declare_mass_point(model, kw["c"], kw["eps"])
        except KeyError:
            raise SpecError("mass point needs c=<real>,eps=<real>") from None
    return model
