"""Command-line entry point: ``ncprob <command> [options]``.

Exit status: 0 success, 1 usage error, 2 invalid input, 3 numerical failure
(including a failed ``check``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import kernels, pmf as pmf_mod, quantifiers
from .checks import SUITES, format_report, run_checks
from .criteria import evaluate, list_appendix, parse_label
from .criteria.evaluate import eval_moment, required_moment_order
from .criteria.polynomial import ROUNDING_GUARD
from .exceptions import NCError, PrecisionEscalation
from .generators import FieldModel
from .kernels import KernelCache, apply_noise, apply_ordering, build_kernel
from .pmf import dump_histogram, load_histogram, moment_vector
from .quantifiers import moment_ncd, nccp, ncd, results_to_csv
from .scanners import SCENARIOS, bootstrap_errors, scan_grid, scan_index_sum, scan_local, scan_touching

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULT_WORKERS = os.cpu_count() or 1
DEFAULT_BOOTSTRAP = 200

_GEN_KEYS = {
    "ideal_twin": {"B", "Mp"},
    "coherent_product": {"mu_s", "mu_i"},
    "thermal_product": {"nu_s", "M_s", "nu_i", "M_i"},
    "noisy_twin": {"B", "Mp", "noise_s", "noise_modes_s", "noise_i", "noise_modes_i"},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def defaults():
    """Every tunable default, as written by ``ncprob defaults``."""
    return {
        "tail_tol": pmf_mod.TAIL_TOL,
        "norm_tol": pmf_mod.NORM_TOL,
        "signed_norm_tol": pmf_mod.SIGNED_NORM_TOL,
        "kernel_column_tol": kernels.COLUMN_TOL,
        "kernel_entry_rel_tol": kernels.ENTRY_REL_TOL,
        "max_precision_bits": kernels.MAX_PRECISION_BITS,
        "rounding_guard": ROUNDING_GUARD,
        "grid_points": quantifiers.GRID_POINTS,
        "s_tol": quantifiers.S_TOL,
        "s_floor_offset": quantifiers.S_FLOOR_OFFSET,
        "nu_start": quantifiers.NU_START,
        "nu_cap": quantifiers.NU_CAP,
        "nu_rel_tol": quantifiers.NU_REL_TOL,
        "bootstrap_resamples": DEFAULT_BOOTSTRAP,
        "workers": DEFAULT_WORKERS,
    }


def _span(text):
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def build_parser():
    d = defaults()
    p = _Parser(prog="ncprob", description="Non-classicality criteria and quantifiers for bipartite photon-number distributions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def io_opts(sp, need_input=True):
        if need_input:
            sp.add_argument("--in", dest="input", required=True, help="histogram file (JSON or CSV), '-' for stdin")
            sp.add_argument("--in-format", choices=("json", "csv"), help="default: from the file extension, else json")
        sp.add_argument("-o", "--out", help="output file (default: stdout)")

    def crit_opts(sp):
        sp.add_argument("--criterion", action="append", default=[], help="criterion label, repeatable (e.g. E:0,0,1 or A:E001)")
        sp.add_argument("--all-appendix", action="store_true", help="add all 32 appendix criteria")
        sp.add_argument("--eps-stat", type=float, default=0.0, help="statistical margin for the negativity verdict (default 0)")

    def mode_opts(sp):
        sp.add_argument("--modes", type=_positive, required=True, help="mode number M used by the transform")
        sp.add_argument("--modes-idler", type=_positive, help="separate idler mode number")

    def worker_opt(sp):
        sp.add_argument("--workers", type=int, default=DEFAULT_WORKERS, help=f"worker threads (default {DEFAULT_WORKERS}; 1 for bit-stability runs)")

    g = sub.add_parser("gen", help="generate a synthetic histogram")
    kind = g.add_mutually_exclusive_group(required=True)
    kind.add_argument("--ideal-twin", nargs="*", metavar="KEY=VALUE", help="keys: B, Mp")
    kind.add_argument("--coherent", nargs="*", metavar="KEY=VALUE", help="keys: mu_s, mu_i")
    kind.add_argument("--thermal", nargs="*", metavar="KEY=VALUE", help="keys: nu_s, M_s, nu_i, M_i")
    kind.add_argument("--noisy-twin", nargs="*", metavar="KEY=VALUE", help="keys: B, Mp, noise_s, noise_modes_s, noise_i, noise_modes_i")
    g.add_argument("--cutoff", type=int, help="photon-number cutoff per arm (default: mean + 10 sd, grown to the tail tolerance)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    io_opts(g, need_input=False)

    e = sub.add_parser("eval", help="evaluate criteria on a histogram")
    io_opts(e)
    crit_opts(e)
    e.add_argument("--representation", choices=("probability", "moment"), default="probability")

    for name, helptext in (("depth", "non-classicality depth"), ("nccp", "non-classicality counting parameter")):
        q = sub.add_parser(name, help=helptext)
        io_opts(q)
        crit_opts(q)
        mode_opts(q)
        worker_opt(q)
        if name == "depth":
            q.add_argument("--route", choices=("probability", "moment"), default="probability")
            q.add_argument("--s-tol", type=_positive, default=d["s_tol"], help=f"bisection tolerance in s (default {d['s_tol']})")
            q.add_argument("--grid-points", type=int, default=d["grid_points"], help=f"bracketing grid size (default {d['grid_points']})")
        else:
            q.add_argument("--nu-cap", type=_positive, default=d["nu_cap"], help=f"largest noise tried (default {d['nu_cap']})")
            q.add_argument("--nu-rel-tol", type=_positive, default=d["nu_rel_tol"], help=f"relative bisection tolerance (default {d['nu_rel_tol']})")

    s = sub.add_parser("scan", help="systematic search over criterion indices")
    io_opts(s)
    mode_opts(s)
    worker_opt(s)
    s.add_argument("--scenario", choices=SCENARIOS, required=True)
    s.add_argument("--family", help="grid: E3, Dsys2, Dsys3; index_sum: DminBall3, DminBall4")
    s.add_argument("--l", type=int, default=1, help="E3 exponent index for grid scans (1 or 2)")
    s.add_argument("--arm", choices=("signal", "idler"))
    s.add_argument("--range-s", type=_span, help="first index range lo:hi (grid, local)")
    s.add_argument("--range-i", type=_span, help="second index range lo:hi (grid, local)")
    s.add_argument("--box", type=int, help="cell box for the touching scenario")
    s.add_argument("--sum-max", type=int, help="touching: only cells with n_s + n_i <= this")
    s.add_argument("--radius", type=int, default=1, help="locality radius d for the local scenario")
    s.add_argument("--sum-range", type=_span, help="index-sum range lo:hi (index_sum)")
    s.add_argument("--eps-stat", type=float, default=0.0)
    s.add_argument("--bootstrap", type=int, metavar="R", help="attach bootstrap errors of criterion values from R resamples (needs counts)")
    s.add_argument("--seed", type=int, default=0, help="bootstrap seed")

    t = sub.add_parser("transform", help="s-ordered or noise-mixed table, or the raw kernel")
    t.add_argument("--in", dest="input", help="histogram file")
    t.add_argument("--in-format", choices=("json", "csv"))
    t.add_argument("-o", "--out")
    how = t.add_mutually_exclusive_group(required=True)
    how.add_argument("--s", type=float, help="target ordering parameter in (-1, 1]")
    how.add_argument("--noise", type=float, help="thermal noise per mode mixed into each arm")
    t.add_argument("--modes", type=_positive, required=True)
    t.add_argument("--modes-idler", type=_positive)
    t.add_argument("--dump-kernel", action="store_true", help="write the ordering kernel as n,m,value rows")
    t.add_argument("--n-in", type=int, help="kernel input size when no histogram is given")
    t.add_argument("--method", choices=("closed", "series"), default="closed")
    t.add_argument("--precision-bits", type=int, help="starting precision for --method series")
    t.add_argument("--format", choices=("json", "csv"), default="csv")

    c = sub.add_parser("check", help="run the built-in property suites")
    c.add_argument("--suite", action="append", choices=sorted(SUITES), help="run only these suites")
    c.add_argument("-o", "--out")

    df = sub.add_parser("defaults", help="print every default as JSON")
    df.add_argument("-o", "--out")
    return p


# helpers -------------------------------------------------------------------


def _emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _load(args):
    fmt = args.in_format
    if fmt is None:
        fmt = "csv" if str(args.input).lower().endswith(".csv") else "json"
    if args.input == "-":
        return load_histogram(sys.stdin.read(), fmt)
    with open(args.input, "rb") as fh:
        return load_histogram(fh, fmt)


def _criteria(args):
    specs = [parse_label(x) for x in args.criterion]
    if args.all_appendix:
        specs.extend(list_appendix())
    if not specs:
        raise UsageError("give at least one --criterion or --all-appendix")
    return specs


def _key_values(pairs, kind):
    params = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        if k not in _GEN_KEYS[kind]:
            raise UsageError(f"unknown parameter {k!r} for {kind}; allowed: {sorted(_GEN_KEYS[kind])}")
        try:
            params[k] = float(v)
        except ValueError:
            raise UsageError(f"parameter {k} needs a number, got {v!r}") from None
    return params


def _map(fn, items, workers):
    if workers and workers > 1 and len(items) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# commands ------------------------------------------------------------------


def cmd_gen(args):
    for flag, kind in (("ideal_twin", "ideal_twin"), ("coherent", "coherent_product"),
                       ("thermal", "thermal_product"), ("noisy_twin", "noisy_twin")):
        pairs = getattr(args, flag)
        if pairs is not None:
            pmf = FieldModel(kind, _key_values(pairs, kind), args.cutoff).build()
            _emit(dump_histogram(pmf, args.format), args.out)
            return EXIT_OK
    raise UsageError("choose a field kind")


def cmd_eval(args):
    specs = _criteria(args)
    pmf = _load(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["criterion", "representation", "value", "verdict"])
    for spec in specs:
        if args.representation == "moment":
            moments = moment_vector(pmf, required_moment_order(spec))
            v = eval_moment(spec, moments, args.eps_stat)
        else:
            v = evaluate(spec, pmf, args.eps_stat)
        w.writerow([spec.label, args.representation, repr(v.value), v.verdict])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_depth(args):
    specs = _criteria(args)
    pmf = _load(args)
    quantifiers.S_TOL = args.s_tol
    quantifiers.GRID_POINTS = args.grid_points
    if args.grid_points < 2:
        raise UsageError("--grid-points must be at least 2")
    cache = KernelCache()
    if args.route == "moment":
        fn = lambda s: moment_ncd(s, pmf, args.modes, args.modes_idler, args.eps_stat)  # noqa: E731
    else:
        fn = lambda s: ncd(s, pmf, args.modes, args.modes_idler, args.eps_stat, cache)  # noqa: E731
    _emit(results_to_csv(_map(fn, specs, args.workers), "tau"), args.out)
    return EXIT_OK


def cmd_nccp(args):
    specs = _criteria(args)
    pmf = _load(args)
    quantifiers.NU_REL_TOL = args.nu_rel_tol
    fn = lambda s: nccp(s, pmf, args.modes, args.nu_cap, args.modes_idler, args.eps_stat)  # noqa: E731
    _emit(results_to_csv(_map(fn, specs, args.workers), "nu"), args.out)
    return EXIT_OK


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"scenario {args.scenario} needs " + ", ".join("--" + m.replace("_", "-") for m in missing))


def cmd_scan(args):
    if args.bootstrap is not None and args.bootstrap < 100:
        raise UsageError("--bootstrap needs at least 100 resamples")
    pmf = _load(args)
    kw = dict(workers=args.workers, eps_stat=args.eps_stat)
    if args.modes_idler is not None:
        raise UsageError("scans use a single mode number")
    if args.scenario == "grid":
        _require(args, "family", "range_s", "range_i")
        rep = scan_grid(args.family, pmf, args.modes, (args.range_s, args.range_i), l=args.l, arm=args.arm, **kw)
    elif args.scenario == "touching":
        _require(args, "box")
        rep = scan_touching(pmf, args.modes, args.box, args.sum_max, **kw)
    elif args.scenario == "local":
        _require(args, "range_s", "range_i")
        rep = scan_local(pmf, args.modes, args.radius, (args.range_s, args.range_i), **kw)
    else:
        _require(args, "family", "sum_range")
        rep = scan_index_sum(args.family, pmf, args.modes, args.sum_range, arm=args.arm, **kw)
    if args.bootstrap is not None:
        cells = [k for k in sorted(rep.grid) if rep.grid[k] is not None]
        errs = bootstrap_errors(pmf, [rep.grid[k].criterion for k in cells], args.bootstrap, seed=args.seed)
        rep.errors = {k: errs[rep.grid[k].criterion] for k in cells}
    _emit(rep.to_csv(), args.out)
    return EXIT_OK


def cmd_transform(args):
    pmf = None
    if args.input is not None:
        pmf = _load(args)
    if args.dump_kernel:
        if args.s is None:
            raise UsageError("--dump-kernel needs --s")
        n_in = args.n_in if args.n_in is not None else (None if pmf is None else max(pmf.shape) - 1)
        if n_in is None:
            raise UsageError("--dump-kernel needs --in or --n-in")
        K = build_kernel(args.s, args.modes, n_in, method=args.method, precision_bits=args.precision_bits)
        _emit(K.to_csv(), args.out)
        return EXIT_OK
    if pmf is None:
        raise UsageError("transform needs --in (or --dump-kernel)")
    if args.s is not None:
        out = apply_ordering(pmf, args.s, args.modes, args.modes_idler, method=args.method)
    else:
        out = apply_noise(pmf, args.noise, args.modes, None, args.modes_idler)
    _emit(dump_histogram(out, args.format), args.out)
    return EXIT_OK


def cmd_check(args):
    results = run_checks(args.suite)
    _emit(format_report(results), args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def cmd_defaults(args):
    _emit(json.dumps(defaults(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen, "eval": cmd_eval, "depth": cmd_depth, "nccp": cmd_nccp,
    "scan": cmd_scan, "transform": cmd_transform, "check": cmd_check, "defaults": cmd_defaults,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    saved = (quantifiers.S_TOL, quantifiers.GRID_POINTS, quantifiers.NU_REL_TOL)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ncprob {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionEscalation as exc:
        print(f"ncprob {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (NCError, ValueError, KeyError) as exc:
        print(f"ncprob {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"ncprob {args.command}: cannot access {exc.filename or 'file'}: {exc.strerror}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"ncprob {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    finally:
        quantifiers.S_TOL, quantifiers.GRID_POINTS, quantifiers.NU_REL_TOL = saved


if __name__ == "__main__":
    sys.exit(main())
