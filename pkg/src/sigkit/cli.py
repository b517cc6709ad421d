"""Command-line interface: sig, logsig, basis, bch and bench.

Numbers are printed as shortest round-trip decimals (at most 17 significant
digits), so parsing a row back recovers the exact float64 values.  Exit codes:
0 success, 2 usage error, 1 data or capacity error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .bch_direct import default_cache_path, load_or_derive
from .lie_basis import LYNDON, STANDARD_HALL, build_basis
from .logsig_engine import (
    CapacityError,
    check_capacity,
    basis_labels,
    logsig_o,
    logsig_s,
    logsig_x,
    prepare,
)
from .tensor_algebra import path_signature

_BASIS_CHOICES = {"lyndon": LYNDON, "hall": STANDARD_HALL}


class _DataError(Exception):
    """A problem with input data (as opposed to command usage)."""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return value


def _read_path_file(filename: str, skip_header: bool) -> np.ndarray:
    try:
        with open(filename, "r", encoding="utf-8") as handle:
            lines = [line.strip() for line in handle]
    except OSError as exc:
        raise _DataError(f"cannot read {filename}: {exc}") from exc
    rows = [line for line in lines if line]
    if skip_header and rows:
        rows = rows[1:]
    if not rows:
        raise _DataError(f"{filename}: no data rows")
    parsed = []
    width = None
    for lineno, row in enumerate(rows, start=1):
        cells = [cell.strip() for cell in row.split(",")]
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise _DataError(
                f"{filename}: row {lineno} has {len(cells)} columns, expected {width}")
        try:
            values = [float(cell) for cell in cells]
        except ValueError as exc:
            raise _DataError(f"{filename}: row {lineno}: {exc}") from exc
        if not all(np.isfinite(values)):
            raise _DataError(f"{filename}: row {lineno}: non-finite value")
        parsed.append(values)
    return np.array(parsed, dtype=np.float64)


def _emit_row(values, as_json: bool) -> None:
    floats = [float(v) for v in values]
    if as_json:
        print(json.dumps(floats))
    else:
        print(",".join(repr(v) for v in floats))


def _cmd_sig(args) -> int:
    points = _read_path_file(args.file, args.header)
    check_capacity(points.shape[1], args.level)
    _emit_row(path_signature(points, args.level).flatten(), args.json)
    return 0


def _cmd_logsig(args) -> int:
    points = _read_path_file(args.file, args.header)
    kind = _BASIS_CHOICES[args.basis]
    method = args.method
    ctx = prepare(points.shape[1], args.level, kind, methods={method.upper()})
    if method == "x":
        values = logsig_x(points, ctx).flatten()
    elif method == "s":
        values = logsig_s(points, ctx).coefficients
    else:
        values = logsig_o(points, ctx).coefficients
    _emit_row(values, args.json)
    return 0


def _cmd_basis(args) -> int:
    basis = build_basis(args.dimension, args.level, _BASIS_CHOICES[args.basis])
    for elt in basis.elements:
        print(elt)
    return 0


def _cmd_bch(args) -> int:
    path = args.cache if args.cache else default_cache_path()
    series = load_or_derive(args.level, path)
    print(f"BCH-LYNDON maxlevel={series.max_level} "
          f"elements={series.basis.size} cache={path}")
    return 0


def generate_bench_paths(d: int, num_paths: int, steps: int, seed: int) -> np.ndarray:
    """Deterministic benchmark workload: (num_paths, steps, d) points.

    Each path starts at the origin and accumulates standard-normal increments
    drawn from the counter-based Philox generator keyed by seed, so the same
    seed reproduces the same paths on any platform.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    increments = rng.standard_normal((num_paths, max(steps - 1, 0), d))
    points = np.zeros((num_paths, steps, d))
    np.cumsum(increments, axis=1, out=points[:, 1:, :])
    return points


def _cmd_bench(args) -> int:
    methods = [m.strip().lower() for m in args.methods.split(",") if m.strip()]
    valid = {"sig", "x", "s", "o"}
    bad = [m for m in methods if m not in valid]
    if bad:
        raise _DataError(f"unknown bench methods: {', '.join(bad)}")
    kind = _BASIS_CHOICES[args.basis]
    paths = generate_bench_paths(args.dimension, args.paths, args.steps, args.seed)
    print("method,basis,d,m,num_paths,steps,seconds_total,prepare_seconds")
    for method in methods:
        try:
            prepare_seconds = 0.0
            if method == "sig":
                check_capacity(args.dimension, args.level)
                start = time.perf_counter()
                for pts in paths:
                    path_signature(pts, args.level)
                total = time.perf_counter() - start
            else:
                start = time.perf_counter()
                ctx = prepare(args.dimension, args.level, kind,
                              methods={method.upper()})
                prepare_seconds = time.perf_counter() - start
                compute = {"x": logsig_x, "s": logsig_s, "o": logsig_o}[method]
                start = time.perf_counter()
                for pts in paths:
                    compute(pts, ctx)
                total = time.perf_counter() - start
        except CapacityError as exc:
            print(f"bench: skipping method {method}: {exc}", file=sys.stderr)
            continue
        print(f"{method},{args.basis},{args.dimension},{args.level},"
              f"{args.paths},{args.steps},{total:.6f},{prepare_seconds:.6f}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigkit",
        description="Signatures and log signatures of piecewise-linear paths.")
    sub = parser.add_subparsers(dest="command", required=True)

    sig = sub.add_parser("sig", help="signature of a path file")
    sig.add_argument("file", help="CSV file, one point per row")
    sig.add_argument("-m", "--level", type=_positive_int, required=True)
    sig.add_argument("--header", action="store_true", help="skip the first row")
    sig.add_argument("--json", action="store_true", help="emit a JSON array")
    sig.set_defaults(func=_cmd_sig)

    logsig = sub.add_parser("logsig", help="log signature of a path file")
    logsig.add_argument("file", help="CSV file, one point per row")
    logsig.add_argument("-m", "--level", type=_positive_int, required=True)
    logsig.add_argument("--basis", choices=sorted(_BASIS_CHOICES), default="lyndon")
    logsig.add_argument("--method", choices=["x", "s", "o"], default="s")
    logsig.add_argument("--header", action="store_true", help="skip the first row")
    logsig.add_argument("--json", action="store_true", help="emit a JSON array")
    logsig.set_defaults(func=_cmd_logsig)

    basis = sub.add_parser("basis", help="list basis elements, one per line")
    basis.add_argument("-d", "--dimension", type=_positive_int, required=True)
    basis.add_argument("-m", "--level", type=_positive_int, required=True)
    basis.add_argument("--basis", choices=sorted(_BASIS_CHOICES), default="lyndon")
    basis.set_defaults(func=_cmd_basis)

    bch = sub.add_parser("bch", help="derive or validate the cached BCH series")
    bch.add_argument("--level", type=_positive_int, required=True)
    bch.add_argument("--cache", help="cache file (default: $SIGKIT_BCH_CACHE)")
    bch.set_defaults(func=_cmd_bch)

    bench = sub.add_parser("bench", help="time methods on a seeded random workload")
    bench.add_argument("-d", "--dimension", type=_positive_int, required=True)
    bench.add_argument("-m", "--level", type=_positive_int, required=True)
    bench.add_argument("--paths", type=_positive_int, default=100)
    bench.add_argument("--steps", type=_positive_int, default=100)
    bench.add_argument("--methods", default="sig,s")
    bench.add_argument("--basis", choices=sorted(_BASIS_CHOICES), default="lyndon")
    bench.add_argument("--seed", type=_nonnegative_int, default=0)
    bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (_DataError, CapacityError, ValueError) as exc:
        print(f"sigkit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
