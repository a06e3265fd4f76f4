"""Command-line front end.

Each subcommand writes ``<out-dir>/<command>.json`` (an experiment record)
and, where it produces curves or tables, ``<out-dir>/<command>-<table>.csv``.
The output directory defaults to ``$EIGCOUNT_OUTPUT_DIR`` or ``./eigcount-out``.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, experiments
from .rng import DEFAULT_SEED
from .spectral import Interval

log = logging.getLogger("eigcount")

SCHEMA_VERSION = 1
OUTPUT_ENV = "EIGCOUNT_OUTPUT_DIR"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_IO = 4
EXIT_NUMERIC = 5


@dataclass
class ExperimentRecord:
    command: str
    params: dict
    seed: int
    version: str
    wall_time: float
    payload: dict
    uncertainty: dict
    schema: int = SCHEMA_VERSION
    created: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Interval):
        return [str(obj.lower), str(obj.upper)]
    return str(obj)


def _int_list(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def _float_list(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _interval(text: str) -> Interval:
    try:
        return Interval.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _binomial(text: str) -> tuple[int, float]:
    size, eta = text.split(",")
    return int(size), float(eta)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out-dir", default=None, help=f"defaults to ${OUTPUT_ENV} or ./eigcount-out")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="eigcount", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="draw one normalized spectrum")
    p.add_argument("--kind", default="GUE",
                   choices=["GUE", "GOE", "GSE", "wigner-hermitian", "wigner-symmetric", "LUE", "covariance"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--atom", default="gaussian", choices=["gaussian", "matched", "rademacher"])
    p.add_argument("--method", default="direct", choices=["direct", "interlace"])

    p = sub.add_parser("kernel-dist", parents=[common], help="exact GUE counting law")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--interval", type=_interval, default=Interval(0.0, math.inf))

    for name, helptext in (("rate-curve", "tail rates against xi^2/2"), ("cgf", "exact scaled CGF")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--interval", type=_interval, default=Interval(0.0, math.inf))
        p.add_argument("--binomial", type=_binomial, default=None, metavar="K,ETA")
        p.add_argument("--a", type=float, default=1.0)
        if name == "rate-curve":
            p.add_argument("--method", default="exact", choices=["exact", "mc"])
            p.add_argument("--xi", type=_float_list, default=[-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
            p.add_argument("--replicas", type=int, default=10000)
        else:
            p.add_argument("--theta", type=_float_list, default=[-2.0, -1.0, 0.0, 1.0, 2.0])

    p = sub.add_parser("variance-scan", parents=[common], help="variance of N_I against log n")
    p.add_argument("--kind", default="GUE", choices=["GUE", "GOE", "GSE", "wigner-hermitian-matched", "LUE"])
    p.add_argument("--method", default="exact", choices=["exact", "mc"])
    p.add_argument("--ns", type=_int_list, default=[64, 128, 256, 512])
    p.add_argument("--interval", type=_interval, default=None)
    p.add_argument("--replicas", type=int, default=2000)

    p = sub.add_parser("clt-compare", parents=[common], help="exact kernel law against Monte Carlo")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--interval", type=_interval, default=Interval(0.0, math.inf))
    p.add_argument("--replicas", type=int, default=10000)

    p = sub.add_parser("interlace-test", parents=[common], help="interlacing identities")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--replicas", type=int, default=5000)
    p.add_argument("--instances", type=int, default=100000)

    p = sub.add_parser("eigstat", parents=[common], help="bulk eigenvalue statistic sweep")
    p.add_argument("--kind", default="GUE", choices=["GUE", "GOE", "GSE"])
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--indices", type=_int_list, default=None, help="1-indexed; default n/4, n/2, 3n/4")
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--method", default="direct", choices=["direct", "interlace"])

    p = sub.add_parser("mp-scan", parents=[common], help="covariance counting variance and bulk statistic")
    p.add_argument("--ns", type=_int_list, default=[64, 128, 256])
    p.add_argument("--p-ratio", type=float, default=1.0)
    p.add_argument("--replicas", type=int, default=2000)
    p.add_argument("--atom", default="gaussian", choices=["gaussian", "matched"])
    p.add_argument("--a", type=float, default=1.0)

    p = sub.add_parser("moments", parents=[common], help="exact moment report for an atom")
    p.add_argument("--atom", default="matched", choices=["gaussian", "matched", "rademacher"])
    p.add_argument("--variance", default="1/2")
    return parser


def _dispatch(args) -> experiments.Result:
    c = args.command
    if c == "sample":
        if args.p is not None and args.kind not in ("LUE", "covariance"):
            raise ValueError("--p only applies to covariance kinds")
        return experiments.sample(args.kind, args.n, args.p, args.atom, args.seed, args.method)
    if c == "kernel-dist":
        return experiments.kernel_dist(args.n, args.interval)
    if c in ("rate-curve", "cgf"):
        n = args.n if args.binomial is None else None
        if n is None and args.binomial is None:
            raise ValueError("give --n for the GUE kernel law or --binomial K,ETA")
        if c == "cgf":
            return experiments.cgf(args.a, args.theta, n, args.interval, args.binomial)
        return experiments.rate_curve(args.method, args.a, args.xi, n, args.interval, args.binomial,
                                      args.replicas, args.seed, args.threads)
    if c == "variance-scan":
        if args.method == "exact" and args.kind != "GUE":
            raise ValueError("--method exact is only available for GUE")
        if args.interval is None and args.kind != "LUE":
            raise ValueError("--interval is required for Wigner kinds")
        return experiments.variance_scan_cmd(args.kind, args.ns, args.interval, args.method,
                                             args.replicas, args.seed, args.threads)
    if c == "clt-compare":
        return experiments.clt_compare(args.n, args.interval, args.replicas, args.seed, args.threads)
    if c == "interlace-test":
        return experiments.interlace_test(args.n, args.replicas, args.seed, args.threads, args.instances)
    if c == "eigstat":
        indices = args.indices or [args.n // 4, args.n // 2, (3 * args.n) // 4]
        return experiments.eigstat(args.kind, args.n, indices, args.replicas, args.a, args.seed,
                                   args.threads, args.method)
    if c == "mp-scan":
        return experiments.mp_scan(args.ns, args.p_ratio, args.replicas, args.seed, args.threads,
                                   args.atom, args.a)
    if c == "moments":
        return experiments.moments(args.atom, args.variance)
    raise ValueError(f"unknown command {c!r}")


def _params(args) -> dict:
    skip = {"command", "out_dir", "quiet", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def write_outputs(out_dir: Path, command: str, record: ExperimentRecord, tables: dict) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    path = out_dir / f"{command}.json"
    path.write_text(record.to_json() + "\n")
    written.append(path)
    for name, (columns, rows) in tables.items():
        path = out_dir / f"{command}-{name}.csv"
        with path.open("w", newline="") as fh:
            fh.write(f"# columns: {', '.join(columns)} (schema {SCHEMA_VERSION}, seed {record.seed})\n")
            writer = csv.writer(fh)
            writer.writerow(columns)
            writer.writerows(rows)
        written.append(path)
    return written


def _print_summary(command: str, summary, written):
    width = max([len(str(k)) for k, _ in summary] + [8])
    print(f"== {command} ==")
    for key, value in summary:
        if isinstance(value, float):
            value = f"{value:.6g}"
        print(f"  {str(key):<{width}}  {value}")
    for path in written:
        print(f"  wrote {path}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID

    start = time.perf_counter()
    try:
        result = _dispatch(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - start

    record = ExperimentRecord(
        command=args.command, params=_params(args), seed=args.seed, version=__version__,
        wall_time=elapsed, payload=result.payload, uncertainty=result.uncertainty,
        created=time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    )
    out_dir = Path(args.out_dir or os.environ.get(OUTPUT_ENV) or "eigcount-out")
    try:
        written = write_outputs(out_dir, args.command, record, result.tables)
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        _print_summary(args.command, result.summary, written)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
