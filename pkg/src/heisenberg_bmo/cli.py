"""Command-line front end: ``heisenberg-bmo {constants,eval,bmo,verify,volume}``.

Output is JSON (one object per line) or CSV, with every real printed to 17
significant digits. Exit codes: 0 success, 1 usage error, 2 divergent
result, 3 accuracy failure, 4 verification disagreement.
"""
import argparse
import csv
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .bmo import BallGrid, bmo_seminorm_lb, default_grid
from .constants import (ConstantQuery, agree, closed_form, mc_constant, quad_constant)
from .errors import AccuracyFailure, DivergentIntegral, InternalError, InvalidArgument
from .functions import get_function, get_phi
from .group import GroupDimension, unit_ball_volume
from .mc import SeededStream
from .operators import KernelSpec, QuadratureConfig, eval_operator
from .sampling import mc_ball_volume
from .verify import SUITES

EXIT_OK, EXIT_USAGE, EXIT_DIVERGENT, EXIT_ACCURACY, EXIT_DISAGREE = 0, 1, 2, 3, 4
SEED_ENV = "HEISENBERG_BMO_SEED"

# fixed stream ids per command, so outputs depend on --seed only
STREAM_IDS = {"constants": 1, "eval": 2, "bmo": 3, "volume": 4}
SUBCOMMANDS = ("constants", "eval", "bmo", "verify", "volume")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    threads: int = 1
    output_format: str = "json"
    tolerance: Optional[float] = None

    @classmethod
    def from_args(cls, args):
        return cls(args.seed, args.threads, args.format, getattr(args, "tolerance", None))


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for divergence here
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- serialisation ---------------------------------------------------------

def _real(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def to_json(obj):
    """JSON text with floats at 17 significant digits and non-finite reals
    as null."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return _real(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_cell(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (float, np.floating)):
        return "" if not math.isfinite(v) else format(float(v), ".17g")
    if isinstance(v, (list, tuple, np.ndarray, dict)):
        return to_json(v)
    return str(v)


def emit(records, fmt, out):
    if fmt == "json":
        for r in records:
            out.write(to_json(r) + "\n")
        return
    keys = []
    for r in records:
        keys += [k for k in r if k not in keys]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(keys)
    for r in records:
        w.writerow([_csv_cell(r.get(k)) for k in keys])


# -- config ----------------------------------------------------------------

def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _config_path(argv):
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(sub, path):
    """Install config values as defaults of ``sub`` (command line wins)."""
    cfg = read_config(path)
    known = {a.dest: a for a in sub._actions}
    for k, v in cfg.items():
        if k not in known or k in ("help", "config"):
            raise UsageError(f"config key {k!r} is not a flag of {sub.prog}")
        act = known[k]
        if act.const is True and act.nargs == 0:  # store_true
            cfg[k] = v.lower() in ("1", "true", "yes", "on")
        elif act.type is not None:
            try:
                cfg[k] = act.type(v)
            except (TypeError, ValueError, argparse.ArgumentTypeError):
                raise UsageError(f"config key {k!r}: bad value {v!r}") from None
        if act.choices is not None and cfg[k] not in act.choices:
            raise UsageError(f"config key {k!r}: {cfg[k]!r} not in {list(act.choices)}")
        act.required = False
    sub.set_defaults(**cfg)


# -- helpers ---------------------------------------------------------------

def _positive_int(s):
    v = int(s)
    if v < 1:
        raise ValueError(s)
    return v


def _point(s):
    try:
        return [float(t) for t in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {s!r}; expected comma-separated reals") from None


def _stream(args, command):
    return SeededStream(args.run.seed, STREAM_IDS[command])


def _base(args, command, query):
    return {"command": command, "query": query, "seed": args.run.seed, "version": __version__}


def _finish(rec, t0):
    rec["runtime_ms"] = int(round((time.perf_counter() - t0) * 1000.0))
    return rec


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


# -- commands --------------------------------------------------------------

def cmd_constants(args, out):
    phi = get_phi(args.phi) if args.family == "F" else None
    q = ConstantQuery(args.family, args.m, args.n, args.beta, phi, args.omega_source)
    cfg = QuadratureConfig(args.samples, args.truncation, _stream(args, "constants"),
                           threads=args.run.threads)
    query = {"family": args.family, "m": args.m, "n": args.n, "beta": args.beta,
             "phi": args.phi if phi else None, "omega_source": args.omega_source,
             "truncation_radius": args.truncation}
    methods = ["closed", "quad", "mc"] if args.method == "all" else [args.method]
    if q.family == "F":
        if args.method == "closed":
            raise UsageError("family F has no closed form; use --method quad or mc")
        methods = [m for m in methods if m != "closed"]
    records, results = [], []
    for name in methods:
        t0 = time.perf_counter()
        if name == "closed":
            r = closed_form(q)
        elif name == "quad":
            r = quad_constant(q, args.tolerance)
        else:
            r = mc_constant(q, cfg)
        results.append(r)
        rec = _base(args, "constants", query)
        rec.update(r.as_dict())
        records.append(_finish(rec, t0))
    if args.method == "all":
        pairs = []
        for i in range(len(results)):
            for j in range(i + 1, len(results)):
                pairs.append({"a": results[i].method, "b": results[j].method,
                              "agree": agree(results[i], results[j])})
        rec = _base(args, "constants", query)
        rec.update({"method": "agreement-summary", "pairs": pairs,
                    "all_agree": all(p["agree"] for p in pairs)})
        records.append(rec)
    emit(records, args.run.output_format, out)
    divergent = [r for r in results if not r.finite]
    if divergent:
        print(f"divergent: {divergent[0].reason}", file=sys.stderr)
        return EXIT_DIVERGENT
    return EXIT_OK


def _function_list(names, m):
    fs = [get_function(s.strip()) for s in names.split(",")]
    if len(fs) == 1:
        fs = fs * m
    if len(fs) != m:
        raise UsageError(f"expected 1 or {m} function names, got {len(fs)}")
    return fs


def cmd_eval(args, out):
    t0 = time.perf_counter()
    dim = GroupDimension(args.n, args.omega_source)
    phi = get_phi(args.phi) if args.operator == "Hausdorff" else None
    spec = KernelSpec(args.operator, args.m, args.beta, phi)
    fs = _function_list(args.f, args.m)
    cfg = QuadratureConfig(args.samples, args.truncation, _stream(args, "eval"), threads=args.run.threads)
    query = {"operator": args.operator, "m": args.m, "n": args.n, "beta": args.beta,
             "f": [f.name for f in fs], "x": args.x, "form": args.form,
             "truncation_radius": args.truncation, "phi": args.phi if phi else None}
    rec = _base(args, "eval", query)
    try:
        est = eval_operator(spec, dim, fs, args.x, cfg, form=args.form)
    except DivergentIntegral as exc:
        rec.update({"method": "monte-carlo", "status": "divergent", "reason": exc.reason,
                    "value": None, "stderr": None, "n_samples": 0})
        emit([_finish(rec, t0)], args.run.output_format, out)
        print(f"divergent: {exc.reason}", file=sys.stderr)
        return EXIT_DIVERGENT
    rec.update({"method": "monte-carlo", "status": "finite", "value": est.value, "stderr": est.stderr,
                "n_samples": est.n_samples, "truncated": est.truncated})
    emit([_finish(rec, t0)], args.run.output_format, out)
    return EXIT_OK


def cmd_bmo(args, out):
    t0 = time.perf_counter()
    dim = GroupDimension(args.n)
    f = get_function(args.function)
    stream = _stream(args, "bmo")
    grid = default_grid(dim, stream.spawn(0), args.per_ball_samples, n_radii=args.n_radii)
    if args.identity_only:
        grid = BallGrid(dim.identity(), grid.radii, grid.per_ball_samples)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        est = bmo_seminorm_lb(f, dim, grid, stream.spawn(1), threads=args.run.threads,
                              two_pass=not args.single_pass)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.table:
        with open(args.table, "w", encoding="utf-8", newline="") as fh:
            est.to_csv(fh)
    if args.run.output_format == "csv":
        est.to_csv(out)
        return EXIT_OK
    query = {"function": f.name, "n": args.n, "per_ball_samples": args.per_ball_samples,
             "n_radii": args.n_radii, "n_balls": len(est.per_ball_table),
             "two_pass": not args.single_pass, "identity_only": args.identity_only}
    rec = _base(args, "bmo", query)
    rec.update({"method": "grid-lower-bound", "status": "finite", "value": est.lower_bound,
                "stderr": est.stderr, "n_samples": 2 * args.per_ball_samples * len(est.per_ball_table),
                "argmax_ball": {"center": est.argmax_ball.center, "radius": est.argmax_ball.radius}})
    emit([_finish(rec, t0)], args.run.output_format, out)
    return EXIT_OK


def cmd_verify(args, out):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    records, ok = [], True
    for name in names:
        kw = {"seed": args.run.seed, "threads": args.run.threads}
        if args.samples is not None:
            kw["n_samples"] = args.samples
        t0 = time.perf_counter()
        reports = SUITES[name](**kw)
        for rep in reports:
            rec = _base(args, "verify", {"suite": name, "check": rep.check_name})
            d = rep.as_dict()
            d.pop("check_name")
            d["method"] = "monte-carlo"
            d["n_samples"] = rep.config.get("n_samples")
            rec.update(d)
            records.append(_finish(rec, t0))
            if rep.asserting and not rep.agreement:
                ok = False
    emit(records, args.run.output_format, out)
    return EXIT_OK if ok else EXIT_DISAGREE


def cmd_volume(args, out):
    t0 = time.perf_counter()
    dim = GroupDimension(args.n)
    query = {"n": args.n, "r": args.r, "method": args.method}
    rec = _base(args, "volume", query)
    if args.method == "mc":
        est = mc_ball_volume(dim, args.r, args.samples, _stream(args, "volume"), threads=args.run.threads)
        rec.update({"method": "monte-carlo", "value": est.value, "stderr": est.stderr,
                    "n_samples": est.n_samples})
    elif args.method == "quad":
        rec.update({"method": "radial-quadrature", "value": dim.ball_volume(args.r),
                    "stderr": 0.0, "n_samples": None})
    else:
        formula = unit_ball_volume(args.n, "paper-formula") * args.r ** dim.Q
        measured = dim.ball_volume(args.r)
        rec.update({"method": "paper-formula", "value": formula, "stderr": 0.0, "n_samples": None,
                    "measured_value": measured, "ratio_to_measured": formula / measured,
                    "discrepancy": not math.isclose(formula, measured, rel_tol=1e-8)})
        if rec["discrepancy"]:
            print(f"warning: the Gamma-formula volume {formula:.17g} differs from the measured "
                  f"volume {measured:.17g} (ratio {formula / measured:.6g})", file=sys.stderr)
    rec["status"] = "finite"
    emit([_finish(rec, t0)], args.run.output_format, out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"64-bit seed (default ${SEED_ENV} or 0)")
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                        help="worker threads; values do not depend on it")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--config", default=None, help="flat key = value file of flag defaults")

    p = _Parser(prog="heisenberg-bmo", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sp = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sp.add_parser("constants", parents=[common], help="sharp constants A, B, F")
    c.add_argument("--family", choices=("A", "B", "F"), required=True)
    c.add_argument("--m", type=_positive_int, default=1)
    c.add_argument("--n", type=_positive_int, default=1)
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--method", choices=("closed", "quad", "mc", "all"), default="all")
    c.add_argument("--samples", type=_positive_int, default=1_000_000)
    c.add_argument("--truncation", type=float, default=None, help="radial truncation R for MC")
    c.add_argument("--tolerance", type=float, default=1e-10, help="relative quadrature tolerance")
    c.add_argument("--phi", default="unit-ball-indicator", help="Phi for family F")
    c.add_argument("--omega-source", choices=("measured", "paper-formula"), default="measured")
    c.set_defaults(handler=cmd_constants)

    e = sp.add_parser("eval", parents=[common], help="operator value at a point")
    e.add_argument("--operator", choices=("HLP", "Hilbert", "Hausdorff"), required=True)
    e.add_argument("--m", type=_positive_int, default=1)
    e.add_argument("--n", type=_positive_int, default=1)
    e.add_argument("--beta", type=float, default=8.0)
    e.add_argument("--f", default="one", help="function name(s), comma separated")
    e.add_argument("--x", type=_point, required=True, help="point, comma separated")
    e.add_argument("--samples", type=_positive_int, default=100_000)
    e.add_argument("--truncation", type=float, default=None)
    e.add_argument("--form", choices=("dilated", "direct"), default="dilated")
    e.add_argument("--phi", default="unit-ball-indicator", help="Phi for Hausdorff")
    e.add_argument("--omega-source", choices=("measured", "paper-formula"), default="measured")
    e.set_defaults(handler=cmd_eval)

    b = sp.add_parser("bmo", parents=[common], help="grid lower bound of the BMO seminorm")
    b.add_argument("--function", required=True, help="corpus name, e.g. f0 or 2*f0")
    b.add_argument("--n", type=_positive_int, default=1)
    b.add_argument("--per-ball-samples", type=_positive_int, default=20_000)
    b.add_argument("--n-radii", type=_positive_int, default=9)
    b.add_argument("--identity-only", action="store_true", help="only identity-centred balls")
    b.add_argument("--single-pass", action="store_true", help="reuse one sample for f_B and |f - f_B|")
    b.add_argument("--table", default=None, help="write the per-ball CSV table here")
    b.set_defaults(handler=cmd_bmo)

    v = sp.add_parser("verify", parents=[common], help="identity, bound and extremal checks")
    v.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="all")
    v.add_argument("--samples", type=_positive_int, default=None, help="override suite sample counts")
    v.set_defaults(handler=cmd_verify)

    o = sp.add_parser("volume", parents=[common], help="volume of the gauge ball B(0, r)")
    o.add_argument("--n", type=_positive_int, default=1)
    o.add_argument("--r", type=float, default=1.0)
    o.add_argument("--method", choices=("mc", "quad", "paper-formula"), default="mc")
    o.add_argument("--samples", type=_positive_int, default=10_000_000)
    o.set_defaults(handler=cmd_volume)
    return p


def _subparser(parser, name):
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices[name]
    raise InternalError("no subcommands")


def main(argv=None, out=None):
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        path = _config_path(argv)
        if path is not None:
            command = next((t for t in argv if t in SUBCOMMANDS), None)
            if command is None:
                raise UsageError("--config needs a subcommand")
            _apply_config(_subparser(parser, command), path)
        args = parser.parse_args(argv)
        if args.seed is None:
            args.seed = _default_seed()
        if not 0 <= args.seed < 2 ** 64:
            raise UsageError("--seed must be in [0, 2^64)")
        args.run = RunConfig.from_args(args)
        return args.handler(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidArgument as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergentIntegral as exc:
        print(f"divergent: {exc.reason}", file=sys.stderr)
        return EXIT_DIVERGENT
    except AccuracyFailure as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
