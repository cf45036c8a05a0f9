"""``tilegen`` command line.

Exit status: 0 ok, 2 usage, 3 numeric failure, 4 format or input failure.
Errors are printed as one line ``<CODE>: <message>`` on stderr.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import bench as benchmod
from . import gof as gofmod
from .errors import MemoryBudgetExceeded, TilegenError
from .sampler import merge_counters, sample_parallel
from .specs import parse_density, parse_params
from .tiling import StopRule, build, load_table, save_table, stats
from .urng import ALGORITHMS, DEFAULT_ALGORITHM, UniformSource

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_FORMAT = 0, 2, 3, 4
STATS_HEADER = ("level", "N", "R", "E", "bytes")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _sidecar(path):
    return str(path) + ".json"


def _write_stats(history, path):
    with open(path, "w", newline="") as fh:
        fh.write(_stats_csv(history))


def _stats_csv(history):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_HEADER)
    for s in history:
        w.writerow((s.level, s.n_tiles, repr(s.rejection_rate), repr(s.evaluation_rate), s.memory_bytes))
    return buf.getvalue()


def _stop_rule(args):
    return StopRule(
        target_r=None if args.target_r is not None and args.target_r < 0 else args.target_r,
        target_e=args.target_e,
        max_level=args.max_level,
        memory_cap=int(args.memory_cap * 2**20),
    )


def _load_model(args):
    spec = args.density
    mass = list(args.mass_point or [])
    table_path = getattr(args, "table", None)
    if spec is None and table_path:
        try:
            with open(_sidecar(table_path)) as fh:
                meta = json.load(fh)
        except FileNotFoundError:
            raise UsageError("no --density given and no metadata file next to the table") from None
        spec = meta["density"]
        mass = mass or meta.get("mass_points", [])
    if spec is None:
        raise UsageError("--density is required")
    return parse_density(spec, mass), spec, mass


def _source(args):
    return UniformSource(args.seed, args.rng)


def cmd_build(args, out):
    model, spec, mass = _load_model(args)
    try:
        table, history = build(model, _stop_rule(args), samples_per_column=args.samples_per_column)
    except MemoryBudgetExceeded as exc:
        if args.stats:
            _write_stats(exc.history, args.stats)
        raise
    if args.out:
        save_table(table, args.out)
        with open(_sidecar(args.out), "w") as fh:
            json.dump({"density": spec, "mass_points": mass}, fh)
    if args.stats:
        _write_stats(history, args.stats)
    if args.json:
        out.write(json.dumps({
            "level": table.level, "n_tiles": table.n_tiles,
            "stats": [dict(zip(STATS_HEADER, s.as_row())) for s in history],
        }) + "\n")
    elif not args.stats:
        out.write(_stats_csv(history))
    return EXIT_OK


def cmd_sample(args, out):
    table = load_table(args.table)
    model, _, _ = _load_model(args)
    xs, states = sample_parallel(table, model, args.n, _source(args), args.threads)
    if args.format == "f64le":
        payload = xs.astype("<f8").tobytes()
    else:
        payload = "".join(f"{v!r}\n" for v in xs.tolist()).encode()
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sink = getattr(out, "buffer", None)
        if sink is not None:
            sink.write(payload)
        else:
            out.write(payload.decode("latin-1") if args.format == "f64le" else payload.decode())
    c = merge_counters(states)
    summary = dict(c._asdict())
    summary["eval_rate"] = c.density_evals / c.attempts if c.attempts else 0.0
    summary["rejection_rate"] = c.rejections / c.attempts if c.attempts else 0.0
    sys.stderr.write(json.dumps(summary) + "\n")
    return EXIT_OK


def cmd_stats(args, out):
    if args.table:
        history = [stats(load_table(args.table))]
    else:
        model, _, _ = _load_model(args)
        _, history = build(model, _stop_rule(args), samples_per_column=args.samples_per_column)
    if args.json:
        out.write(json.dumps([dict(zip(STATS_HEADER, s.as_row())) for s in history]) + "\n")
    else:
        out.write(_stats_csv(history))
    return EXIT_OK


def _read_samples(path, fmt):
    if fmt == "f64le":
        return np.fromfile(path, dtype="<f8")
    return np.loadtxt(path, dtype=float, ndmin=1)


def cmd_gof(args, out):
    x = _read_samples(args.samples, args.format)
    if args.cdf:
        name, _, params = args.cdf.partition(":")
        kw = parse_params(params)
        a, b = kw.pop("a", None), kw.pop("b", None)
        if a is None or b is None:
            raise UsageError("--cdf needs a= and b= for the truncation interval")
        report = gofmod.kolmogorov_smirnov(x, gofmod.truncated_cdf(name, a, b, **kw))
    else:
        model, _, _ = _load_model(args)
        report = gofmod.chi_square(x, model, n_bins=args.bins)
    out.write(report.to_json() + "\n")
    return EXIT_OK


def cmd_bench(args, out):
    model, _, _ = _load_model(args)
    setup = eval_s = 0.0
    if args.table:
        table = load_table(args.table)
    else:
        table, _, setup, eval_s = benchmod.time_setup(model, _stop_rule(args))
    report = benchmod.run(
        table, model, n=args.n, source=_source(args), interleave=args.interleave,
        interleave_bytes=int(args.interleave_mb * 2**20),
    )
    report.setup_seconds = setup
    report.setup_eval_seconds = eval_s
    if args.json:
        out.write(report.to_json() + "\n")
    else:
        for k, v in report.__dict__.items():
            out.write(f"{k}: {v}\n")
    return EXIT_OK


def _add_density(p):
    p.add_argument("--density", help="builtin:<name>[:k=v,...] or table:<path>[:interp]")
    p.add_argument("--mass-point", action="append", metavar="c=<x>,eps=<e>",
                   help="declare a mass point (repeatable)")


def _add_stop(p):
    p.add_argument("--target-r", type=float, default=0.02,
                   help="stop when R <= this (negative disables)")
    p.add_argument("--target-e", type=float, default=None, help="stop when E <= this")
    p.add_argument("--max-level", type=int, default=26)
    p.add_argument("--memory-cap", type=float, default=64.0, help="MiB")
    p.add_argument("--samples-per-column", type=int, default=2)


def _global_flags(suppress):
    # subcommands repeat the global flags without defaults so that a value
    # given before the subcommand is not overwritten
    def d(v):
        return argparse.SUPPRESS if suppress else v

    p = _Parser(add_help=False)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=d(0))
    p.add_argument("--rng", choices=sorted(ALGORITHMS), default=d(DEFAULT_ALGORITHM))
    p.add_argument("--threads", type=int, default=d(1))
    p.add_argument("--json", action="store_true", default=d(False), help="emit JSON reports")
    return p


def make_parser():
    common = _global_flags(suppress=True)
    parser = _Parser(prog="tilegen", description="Tiling-based rejection sampler.",
                     parents=[_global_flags(suppress=False)])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("build", parents=[common], help="build a tiling table")
    _add_density(p)
    _add_stop(p)
    p.add_argument("--out", help="table file")
    p.add_argument("--stats", help="per-level statistics CSV")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sample", parents=[common], help="stream variates from a table")
    p.add_argument("--table", required=True)
    _add_density(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=("text", "f64le"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("stats", parents=[common], help="per-level statistics")
    p.add_argument("--table")
    _add_density(p)
    _add_stop(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gof", parents=[common], help="goodness-of-fit test of variates")
    p.add_argument("--samples", required=True)
    p.add_argument("--format", choices=("text", "f64le"), default="text")
    _add_density(p)
    p.add_argument("--cdf", help="closed-form CDF for KS, e.g. gaussian:a=-6,b=6")
    p.add_argument("--bins", type=int, default=64)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("bench", parents=[common], help="measure throughput")
    p.add_argument("--table")
    _add_density(p)
    _add_stop(p)
    p.add_argument("--n", type=int, default=10**7)
    p.add_argument("--interleave", action="store_true", help="thrash caches between batches")
    p.add_argument("--interleave-mb", type=float, default=64.0)
    p.set_defaults(func=cmd_bench)
    return parser


def _fail(code, message, status):
    line = " ".join(str(message).split())
    sys.stderr.write(f"{code}: {line}\n")
    return status


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = make_parser().parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("a subcommand is required: build, sample, stats, gof, bench")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args, out)
    except UsageError as exc:
        return _fail("E_USAGE", exc, EXIT_USAGE)
    except TilegenError as exc:
        return _fail(exc.code, exc, exc.exit_status)
    except (OSError, ValueError) as exc:
        return _fail("E_INPUT", exc, EXIT_FORMAT)
    except FloatingPointError as exc:
        return _fail("E_NUMERIC", exc, EXIT_NUMERIC)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
