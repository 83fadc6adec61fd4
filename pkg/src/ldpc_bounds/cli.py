"""Command-line front end.

Verbs: capacity, capacity-limit, bound rate, bound density, threshold,
table1, sweep. Single results are printed as JSON, sweeps as CSV. Output
depends only on the arguments (and any ensemble file), so repeated runs are
byte-identical; run metadata goes to a separate file with ``--meta``.

Exit codes: 0 success, 1 computation failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import sys
from datetime import datetime, timezone

import numpy as np
import scipy

from . import __version__
from ._jit import backend_name
from .bounds import (
    DEFAULT_SERIES, SeriesConfig, density_bound, parse_method, quantized_method, rate_bound,
)
from .channels import (
    BIAWGN, CHANNEL_KINDS, DEFAULT_QUADRATURE, ChannelModel, Quadrature, QuadratureError,
    capacity_with_error, ebno_db_to_sigma, hard_decision_w,
)
from .ensembles import (
    DegreeDistribution, EnsembleFormatError, check_fractions, density_from_profile, load_ensemble,
)
from .kernels import CompositionOverflowError
from .quantizer import LevelOptimizationError
from .thresholds import (
    FIGURE1_COLUMNS, FIGURE2_COLUMNS, TABLE1_COLUMNS, TABLE1_ENSEMBLES, TABLE1_EXPECTED,
    TABLE1_REFERENCE, TABLE1_TOLERANCE, BracketError, MonotonicityError, SweepSpec,
    ThresholdQuery, capacity_limit, grid_points, sweep, table1_row, threshold,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

COMPUTATION_ERRORS = (BracketError, MonotonicityError, QuadratureError, LevelOptimizationError,
                      CompositionOverflowError, ArithmeticError)


class UsageError(Exception):
    pass


def _db(x):
    return f"{x:.3f}"


def _digest(payload) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _finite(obj):
    # strict JSON has no inf/nan; spell them out
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _emit_json(record, out):
    out.write(json.dumps(_finite(record), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _record(args, inputs, computed, display=None, diagnostics=None, reference=None):
    rec = {
        "command": args.argv,
        "input_digest": _digest(inputs),
        "computed": computed,
    }
    if display is not None:
        rec["display"] = display
    if diagnostics is not None:
        rec["diagnostics"] = diagnostics
    if reference is not None:
        rec["reference"] = reference
    return rec


# -- argument helpers -------------------------------------------------------

def _method(text):
    try:
        return parse_method(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _regular(text):
    try:
        left, right = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected two integers, e.g. 3,6") from exc
    return left, right


def _add_numerics(p):
    p.add_argument("--quad-nodes", type=int, default=DEFAULT_QUADRATURE.nodes,
                   help="Gauss-Hermite nodes (checked against twice as many)")
    p.add_argument("--quad-tol", type=float, default=DEFAULT_QUADRATURE.tol)
    p.add_argument("--series-max-terms", type=int, default=DEFAULT_SERIES.max_terms,
                   help="cap on directly summed tanh-moment terms")


def _numerics(args):
    quad = Quadrature(nodes=args.quad_nodes, tol=args.quad_tol)
    series = SeriesConfig(max_terms=args.series_max_terms)
    return quad, series


def _add_ensemble(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--ensemble", metavar="FILE", help='JSON file {"lambda": {...}, "rho": {...}}')
    g.add_argument("--regular", type=_regular, metavar="L,R", help="regular (L,R) ensemble")


def _ensemble(args):
    if getattr(args, "ensemble", None):
        dist = load_ensemble(args.ensemble)
    elif getattr(args, "regular", None):
        dist = DegreeDistribution.regular(*args.regular)
    else:
        return None, None
    return dist, check_fractions(dist)


def _add_channel(p):
    p.add_argument("--channel", choices=CHANNEL_KINDS, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--param", type=float,
                   help="erasure probability, crossover probability, or noise std")
    g.add_argument("--ebno-db", type=float, help="Eb/N0 in dB (BiAWGN only)")


def _channel(args, rate=None):
    if args.ebno_db is not None:
        if args.channel != BIAWGN:
            raise UsageError("--ebno-db only applies to --channel biawgn")
        rate = getattr(args, "rate", None) or rate
        if rate is None or not 0.0 < rate < 1.0:
            raise UsageError("--ebno-db needs a code rate in (0, 1) (from --rate or the ensemble)")
        return ChannelModel(BIAWGN, ebno_db_to_sigma(args.ebno_db, rate))
    return ChannelModel(args.channel, args.param)


def _channel_inputs(args, channel):
    return {"channel": channel.kind, "parameter": channel.parameter}


# -- verbs ------------------------------------------------------------------

def cmd_capacity(args, out):
    quad, _ = _numerics(args)
    channel = _channel(args)
    cap, err = capacity_with_error(channel, quad)
    computed = {"capacity": cap, "hard_decision_w": hard_decision_w(channel)}
    rec = _record(args, _channel_inputs(args, channel), computed,
                  diagnostics={"quadrature_error": err})
    _emit_json(rec, out)
    return EXIT_OK


def cmd_capacity_limit(args, out):
    value = capacity_limit(args.rate, args.channel)
    key = "ebno_db" if args.channel == BIAWGN else "parameter"
    display = {key: _db(value)} if args.channel == BIAWGN else None
    rec = _record(args, {"rate": args.rate, "channel": args.channel}, {key: value}, display)
    _emit_json(rec, out)
    return EXIT_OK


def _method_label(kind, d):
    return quantized_method(d) if kind == "quantized" else kind


def cmd_bound_rate(args, out):
    quad, series = _numerics(args)
    dist, profile = _ensemble(args)
    if args.rate is not None:
        profile = profile.with_rate(args.rate)
    channel = _channel(args, profile.rate)
    kind, d = args.method
    res = rate_bound(channel, profile, kind, d, quad, series)
    inputs = {**_channel_inputs(args, channel), "ensemble": dist.to_dict(),
              "method": _method_label(kind, d), "rate": profile.rate,
              "quad": [quad.nodes, quad.tol], "series": series.max_terms}
    computed = {"rate_upper_bound": res.value, "design_rate": profile.rate}
    if res.levels is not None:
        computed["levels"] = list(res.levels)
    if res.active_term is not None:
        computed["active_term"] = res.active_term
    rec = _record(args, inputs, computed, diagnostics=res.to_dict()["diagnostics"])
    rec["method"] = res.method
    _emit_json(rec, out)
    return EXIT_OK


def cmd_bound_density(args, out):
    quad, _ = _numerics(args)
    dist, profile = _ensemble(args)
    rate = args.rate if args.rate is not None else (profile.rate if profile else None)
    channel = _channel(args, rate)
    kind, d = args.method
    res = density_bound(channel, args.epsilon, kind, d, quad)
    inputs = {**_channel_inputs(args, channel), "epsilon": args.epsilon,
              "method": _method_label(kind, d), "quad": [quad.nodes, quad.tol]}
    computed = {"density_lower_bound": res.value, "k1": res.k1, "k2": res.k2}
    if res.x_star is not None:
        computed["x_star"] = res.x_star
    if res.levels is not None:
        computed["levels"] = list(res.levels)
    if profile is not None and 0.0 < profile.rate < 1.0:
        computed["ensemble_density"] = density_from_profile(profile)
    diag = res.to_dict()["diagnostics"]
    # shown clamped at zero; the raw value stays in "computed"
    display = {"density_lower_bound": f"{max(res.value, 0.0):.6g}",
               "clamped_for_display": res.value < 0.0}
    rec = _record(args, inputs, computed, display, diag)
    rec["method"] = res.method
    _emit_json(rec, out)
    return EXIT_OK


def cmd_threshold(args, out):
    dist, profile = _ensemble(args)
    kind, d = args.method
    query = ThresholdQuery(profile, kind, d, family=args.family, tolerance=args.tolerance,
                           bracket=tuple(args.bracket) if args.bracket else None)
    res = threshold(query)
    inputs = {"ensemble": dist.to_dict(), "method": res.method, "family": args.family,
              "tolerance": args.tolerance, "bracket": args.bracket}
    computed = {"threshold": res.value, "unit": res.unit, "parameter": res.parameter,
                "design_rate": profile.rate}
    display = {"threshold": _db(res.value) if res.unit == "dB" else f"{res.value:.6g}"}
    rec = _record(args, inputs, computed, display, {"evaluations": res.evaluations})
    rec["method"] = res.method
    _emit_json(rec, out)
    return EXIT_OK


def _table1_rows():
    rows = []
    failed = False
    for ens in TABLE1_ENSEMBLES:
        vals = table1_row(*ens)
        marks = {}
        for col in TABLE1_COLUMNS:
            ok = abs(vals[col] - TABLE1_EXPECTED[ens][col]) <= TABLE1_TOLERANCE[col]
            marks[col] = ok
            failed |= not ok
        rows.append((ens, vals, marks))
    return rows, failed


def cmd_table1(args, out):
    rows, failed = _table1_rows()
    ref_cols = list(TABLE1_REFERENCE)
    if args.format == "json":
        records = []
        for ens, vals, marks in rows:
            records.append({
                "ensemble": f"({ens[0]},{ens[1]})",
                "computed": vals,
                "display": {c: _db(v) for c, v in vals.items()},
                "within_tolerance": marks,
                "reference": {c: {"value": TABLE1_REFERENCE[c][ens], "source": c[c.index("["):]}
                              for c in ref_cols},
            })
        _emit_json({"command": args.argv, "input_digest": _digest({"table": "table1"}),
                    "rows": records}, out)
    else:
        head = ["ensemble"] + list(TABLE1_COLUMNS) + [f"{c} (reference)" for c in ref_cols]
        body = []
        for ens, vals, marks in rows:
            cells = [f"({ens[0]},{ens[1]})"]
            cells += [_db(vals[c]) + ("" if marks[c] else " FAIL") for c in TABLE1_COLUMNS]
            cells += [_db(TABLE1_REFERENCE[c][ens]) for c in ref_cols]
            body.append(cells)
        widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
        for r in [head] + body:
            out.write("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() + "\n")
        out.write("computed columns in dB Eb/N0; reference columns are literature constants, not computed\n")
    return EXIT_FAILURE if failed else EXIT_OK


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_sweep(args, out):
    start, stop, step = args.start, args.stop, args.step
    if args.figure == 1:
        start = 0.1 if start is None else start
        stop = 0.9 if stop is None else stop
        step = 0.02 if step is None else step
    else:
        start = 0.25 if start is None else start
        stop = 2.0 if stop is None else stop
        step = 0.05 if step is None else step
    try:
        grid_points(start, stop, step)
        spec = SweepSpec(args.figure, start, stop, step, right_degree=args.right_degree,
                         rate=args.rate)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = sweep(spec)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_csv_cell(row[c]) for c in result.columns])
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return EXIT_OK


# -- parser -----------------------------------------------------------------

SWEEP_HELP = (
    "figure 1 columns: " + ",".join(FIGURE1_COLUMNS)
    + " (thresholds in dB Eb/N0 for a right-regular profile at each design rate; "
    "default grid 0.1:0.9:0.02). "
    "figure 2 columns: " + ",".join(FIGURE2_COLUMNS)
    + " (density lower bounds at eps = 1 - R/C; default grid 0.25:2.0:0.05 dB)."
)


def build_parser():
    parser = argparse.ArgumentParser(prog="ldpc-bounds", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--meta", metavar="FILE", help="write run metadata (time, versions) to FILE")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("capacity", help="capacity and hard-decision crossover of a channel")
    _add_channel(p)
    p.add_argument("--rate", type=float, help="code rate, needed with --ebno-db")
    _add_numerics(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("capacity-limit", help="Eb/N0 (or channel parameter) where capacity equals the rate")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--channel", choices=CHANNEL_KINDS, default=BIAWGN)
    p.set_defaults(func=cmd_capacity_limit)

    p = sub.add_parser("bound", help="rate upper bound or parity-check density lower bound")
    bsub = p.add_subparsers(dest="kind", required=True)
    for name, func in (("rate", cmd_bound_rate), ("density", cmd_bound_density)):
        q = bsub.add_parser(name)
        _add_channel(q)
        _add_ensemble(q, required=(name == "rate"))
        q.add_argument("--method", type=_method, default=("unquantized", None),
                       help="2level | quantized:D | unquantized")
        q.add_argument("--rate", type=float, help="override the design rate")
        if name == "density":
            q.add_argument("--epsilon", type=float, required=True,
                           help="fraction of capacity given up, rate = (1 - eps) C")
        _add_numerics(q)
        q.set_defaults(func=func)

    p = sub.add_parser("threshold", help="bound threshold of an ensemble")
    _add_ensemble(p)
    p.add_argument("--method", type=_method, required=True, help="2level | quantized:D | unquantized")
    p.add_argument("--family", choices=CHANNEL_KINDS, default=BIAWGN)
    p.add_argument("--tolerance", type=float, default=1e-4,
                   help="dB for biawgn, parameter units otherwise")
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"),
                   help="search range: sigma for biawgn, the channel parameter otherwise")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("table1", help="threshold table for the (3,6), (4,6) and (3,4) ensembles")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("sweep", help="figure data as CSV", description=SWEEP_HELP)
    p.add_argument("--figure", type=int, choices=(1, 2), required=True)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--right-degree", type=int, default=6, help="figure 1: check degree a_R")
    p.add_argument("--rate", type=float, default=0.5, help="figure 2: code rate")
    p.add_argument("--out", metavar="FILE.csv", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_sweep)
    return parser


def _write_meta(path, argv, status):
    meta = {
        "argv": argv,
        "exit_status": status,
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "backend": backend_name(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv=None, out=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        status = args.func(args, out)
    except (UsageError, EnsembleFormatError, FileNotFoundError) as exc:
        print(f"ldpc-bounds: error: {exc}", file=sys.stderr)
        status = EXIT_USAGE
    except COMPUTATION_ERRORS as exc:
        print(f"ldpc-bounds: computation failed: {exc}", file=sys.stderr)
        status = EXIT_FAILURE
    except ValueError as exc:
        print(f"ldpc-bounds: error: {exc}", file=sys.stderr)
        status = EXIT_USAGE
    if args.meta:
        _write_meta(args.meta, argv, status)
    return status


if __name__ == "__main__":
    sys.exit(main())
