"""File-based command line: gen, solve, phase, bench.

Every command reads and writes plain files (binary tensors, CSV, a
key-value manifest) and is deterministic for fixed flags and seed; only
timing values vary between runs.  Exit codes: 0 success, 1 usage error,
2 unreadable or malformed data, 3 solve did not converge (outputs are
still written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import _backend
from .fiber_cur import cur_reconstruct_full
from .solver import SolverConfig, hard_threshold, rtcur
from .synth import (
    DEFAULT_ALPHAS,
    DEFAULT_UPSILONS,
    METHOD_NAMES,
    InstanceSpec,
    make_instance,
    run_phase_transition,
    run_timing,
    timing_to_csv,
)
from .tensor import DenseTensor
from .tensorfile import TensorFormatError, read_header, read_tensor, write_tensor

__all__ = ["main"]

USAGE_ERROR = 1
DATA_ERROR = 2
NO_CONVERGENCE = 3

# --full-output refuses to materialize tensors above this many entries
# unless --force is given
FULL_OUTPUT_CAP = 2**31


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract wants 1
    def error(self, message):
        raise _UsageError(message)


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _write_manifest(path, pairs) -> None:
    with open(path, "w") as f:
        for key, value in pairs:
            f.write(f"{key}: {_fmt(value)}\n")


def _parse_int_list(text, flag):
    try:
        values = [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise _UsageError(f"{flag} expects comma-separated integers, got {text!r}")
    if not values:
        raise _UsageError(f"{flag} expects at least one value")
    return values


def _parse_float_list(text, flag):
    try:
        values = [float(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise _UsageError(f"{flag} expects comma-separated numbers, got {text!r}")
    if not values:
        raise _UsageError(f"{flag} expects at least one value")
    return values


def _out_dir(args) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


# ------------------------------------------------------------------- gen


def cmd_gen(args) -> int:
    try:
        spec = InstanceSpec(n=args.n, d=args.d, r=args.r, alpha=args.alpha, seed=args.seed)
    except ValueError as exc:
        raise _UsageError(str(exc))
    t0 = time.perf_counter()
    x, low, sparse = make_instance(spec)
    out = _out_dir(args)
    paths = {
        "X.tnsr": x,
        "L_true.tnsr": low,
        "S_true.tnsr": sparse,
    }
    for name, t in paths.items():
        write_tensor(os.path.join(out, name), t)
    _write_manifest(
        os.path.join(out, "manifest.txt"),
        [
            ("command", "gen"),
            ("n", spec.n),
            ("d", spec.d),
            ("r", spec.r),
            ("alpha", spec.alpha),
            ("seed", args.seed),
            ("outputs", ",".join(paths)),
            ("wall_seconds", time.perf_counter() - t0),
        ],
    )
    return 0


# ----------------------------------------------------------------- solve


def _write_matrix(path, mat) -> None:
    write_tensor(path, DenseTensor._wrap(np.asfortranarray(mat)))


def cmd_solve(args) -> int:
    try:
        _, dims = read_header(args.input)
    except FileNotFoundError:
        print(f"error: cannot read {args.input}: no such file", file=sys.stderr)
        return DATA_ERROR
    except (TensorFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR

    ranks = _parse_int_list(args.ranks, "--ranks")
    if len(ranks) != len(dims):
        raise _UsageError(
            f"--ranks has {len(ranks)} entries for a {len(dims)}-mode tensor"
        )
    try:
        cfg = SolverConfig(
            ranks=tuple(ranks),
            eps=args.eps,
            zeta0=args.zeta0,
            gamma=args.gamma,
            upsilon=args.upsilon,
            variant=args.variant.upper(),
            max_iters=args.max_iters,
            seed=args.seed,
        )
        for m, (r, d) in enumerate(zip(cfg.ranks, dims), start=1):
            if r > d:
                raise ValueError(f"mode {m}: rank {r} exceeds extent {d}")
    except ValueError as exc:
        raise _UsageError(str(exc))

    entries = 1
    for d in dims:
        entries *= d
    if args.full_output and entries > FULL_OUTPUT_CAP and not args.force:
        raise _UsageError(
            f"--full-output would materialize {entries} entries "
            f"(cap {FULL_OUTPUT_CAP}); pass --force to override"
        )

    try:
        x = read_tensor(args.input)
    except (TensorFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR

    t0 = time.perf_counter()
    res = rtcur(x, cfg)
    wall = time.perf_counter() - t0

    out = _out_dir(args)
    outputs = []

    def emit(name, writer):
        writer(os.path.join(out, name))
        outputs.append(name)

    emit("core.tnsr", lambda p: write_tensor(p, res.cur.core))
    for m, fib in enumerate(res.cur.fibers, start=1):
        emit(f"fibers_mode{m}.tnsr", lambda p, v=fib: _write_matrix(p, v))
    for m, fac in enumerate(res.cur.factors, start=1):
        emit(f"factor_mode{m}.tnsr", lambda p, v=fac: _write_matrix(p, v))
    emit(
        "sparse_core.tnsr",
        lambda p: write_tensor(
            p, DenseTensor._wrap(np.asfortranarray(res.sparse.core))
        ),
    )
    for m, blk in enumerate(res.sparse.fibers, start=1):
        emit(f"sparse_fibers_mode{m}.tnsr", lambda p, v=blk: _write_matrix(p, v))

    idx = res.sparse.indices
    with open(os.path.join(out, "indices.json"), "w") as f:
        json.dump(
            {
                "rows": [r.tolist() for r in idx.rows],
                "cols": [c.tolist() for c in idx.cols],
            },
            f,
        )
    outputs.append("indices.json")

    with open(os.path.join(out, "error_history.csv"), "w") as f:
        f.write("iteration,e\n")
        for k, e in enumerate(res.error_history, start=1):
            f.write(f"{k},{e!r}\n")
    outputs.append("error_history.csv")

    if args.full_output:
        low_full = cur_reconstruct_full(res.cur)
        emit("L.tnsr", lambda p: write_tensor(p, low_full))
        sparse_full = DenseTensor(
            hard_threshold(x.data - low_full.data, res.zeta_final), x.shape
        )
        emit("S.tnsr", lambda p: write_tensor(p, sparse_full))

    rows, cols = cfg.resolve_sample_sizes(x.shape)
    _write_manifest(
        os.path.join(out, "manifest.txt"),
        [
            ("command", "solve"),
            ("input", args.input),
            ("input_sha256", _sha256(args.input)),
            ("dims", x.shape),
            ("ranks", cfg.ranks),
            ("eps", cfg.eps),
            ("zeta0", "inf-norm" if cfg.zeta0 is None else cfg.zeta0),
            ("gamma", cfg.gamma),
            ("upsilon", cfg.upsilon),
            ("variant", cfg.variant),
            ("max_iters", cfg.max_iters),
            ("seed", cfg.seed),
            ("row_samples", rows),
            ("col_samples", cols),
            ("backend", _backend.backend_name),
            ("iterations", res.iterations),
            ("converged", res.converged),
            ("final_error", res.error_history[-1]),
            ("zeta_final", res.zeta_final),
            ("resamples", res.iterations - 1 if cfg.variant == "R" else 0),
            ("outputs", ",".join(outputs)),
            ("wall_seconds", wall),
        ],
    )
    return 0 if res.converged else NO_CONVERGENCE


# ----------------------------------------------------------------- phase


def cmd_phase(args) -> int:
    alphas = (
        _parse_float_list(args.alphas, "--alphas")
        if args.alphas is not None
        else DEFAULT_ALPHAS
    )
    upsilons = (
        _parse_float_list(args.upsilons, "--upsilons")
        if args.upsilons is not None
        else DEFAULT_UPSILONS
    )
    for a in alphas:
        if not 0.0 <= a < 1.0:
            raise _UsageError(f"--alphas values must lie in [0, 1), got {a}")
    for u in upsilons:
        if not u > 0.0:
            raise _UsageError(f"--upsilons values must be positive, got {u}")
    if args.trials < 1:
        raise _UsageError(f"--trials must be >= 1, got {args.trials}")
    try:
        t0 = time.perf_counter()
        grid = run_phase_transition(
            alphas=alphas,
            upsilons=upsilons,
            trials=args.trials,
            n=args.n,
            d=args.d,
            r=args.r,
            variant=args.variant.upper(),
            max_iters=args.max_iters,
            base_seed=args.seed,
        )
    except ValueError as exc:
        raise _UsageError(str(exc))
    out = _out_dir(args)
    with open(os.path.join(out, "phase.csv"), "w") as f:
        f.write(grid.to_csv())
    _write_manifest(
        os.path.join(out, "manifest.txt"),
        [
            ("command", "phase"),
            ("alphas", alphas),
            ("upsilons", upsilons),
            ("trials", args.trials),
            ("n", args.n),
            ("d", args.d),
            ("r", args.r),
            ("variant", args.variant.upper()),
            ("max_iters", args.max_iters),
            ("seed", args.seed),
            ("outputs", "phase.csv"),
            ("wall_seconds", time.perf_counter() - t0),
        ],
    )
    return 0


# ----------------------------------------------------------------- bench


def cmd_bench(args) -> int:
    dims = _parse_int_list(args.dims, "--dims")
    methods = tuple(args.methods.split(","))
    for m in methods:
        if m not in METHOD_NAMES:
            raise _UsageError(
                f"unknown method {m!r}, expected one of {','.join(METHOD_NAMES)}"
            )
    if any(d < 1 for d in dims):
        raise _UsageError("--dims values must be >= 1")
    if args.repeats < 1:
        raise _UsageError(f"--repeats must be >= 1, got {args.repeats}")
    try:
        t0 = time.perf_counter()
        rows = run_timing(
            dims=dims,
            methods=methods,
            repeats=args.repeats,
            n=args.n,
            r=args.r,
            alpha=args.alpha,
            upsilon=args.upsilon,
            max_iters=args.max_iters,
            timeout_s=args.timeout,
            base_seed=args.seed,
        )
    except ValueError as exc:
        raise _UsageError(str(exc))
    out = _out_dir(args)
    with open(os.path.join(out, "bench.csv"), "w") as f:
        f.write(timing_to_csv(rows))
    _write_manifest(
        os.path.join(out, "manifest.txt"),
        [
            ("command", "bench"),
            ("dims", dims),
            ("methods", methods),
            ("repeats", args.repeats),
            ("n", args.n),
            ("r", args.r),
            ("alpha", args.alpha),
            ("upsilon", args.upsilon),
            ("max_iters", args.max_iters),
            ("timeout", args.timeout),
            ("seed", args.seed),
            ("outputs", "bench.csv"),
            ("wall_seconds", time.perf_counter() - t0),
        ],
    )
    return 0


# ------------------------------------------------------------------ main


def _build_parser() -> _Parser:
    parser = _Parser(prog="rtcur", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic instance to disk")
    gen.add_argument("--n", type=int, default=3)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--r", type=int, required=True)
    gen.add_argument("--alpha", type=float, default=0.1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-dir", required=True)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="separate a tensor file into low-rank + sparse")
    solve.add_argument("--input", required=True)
    solve.add_argument("--ranks", required=True, help="comma-separated, one per mode")
    solve.add_argument("--upsilon", type=float, default=3.0)
    solve.add_argument("--gamma", type=float, default=0.7)
    solve.add_argument("--zeta0", type=float, default=None,
                       help="initial threshold (default: observed sup-norm)")
    solve.add_argument("--eps", type=float, default=1e-5)
    solve.add_argument("--variant", choices=["f", "r", "F", "R"], default="f")
    solve.add_argument("--max-iters", type=int, default=500)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--out-dir", required=True)
    solve.add_argument("--full-output", action="store_true",
                       help="also write full L.tnsr and S.tnsr")
    solve.add_argument("--force", action="store_true",
                       help="allow --full-output above the size cap")
    solve.set_defaults(func=cmd_solve)

    phase = sub.add_parser("phase", help="success-rate grid over alpha and upsilon")
    phase.add_argument("--alphas", default=None, help="comma-separated fractions")
    phase.add_argument("--upsilons", default=None, help="comma-separated factors")
    phase.add_argument("--trials", type=int, default=10)
    phase.add_argument("--n", type=int, default=3)
    phase.add_argument("--d", type=int, default=60)
    phase.add_argument("--r", type=int, default=3)
    phase.add_argument("--variant", choices=["f", "r", "F", "R"], default="f")
    phase.add_argument("--max-iters", type=int, default=150)
    phase.add_argument("--seed", type=int, default=0)
    phase.add_argument("--out-dir", required=True)
    phase.set_defaults(func=cmd_phase)

    bench = sub.add_parser("bench", help="wall-clock comparison across methods")
    bench.add_argument("--dims", required=True, help="comma-separated extents")
    bench.add_argument("--methods", default=",".join(METHOD_NAMES))
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--n", type=int, default=3)
    bench.add_argument("--r", type=int, default=3)
    bench.add_argument("--alpha", type=float, default=0.1)
    bench.add_argument("--upsilon", type=float, default=3.0)
    bench.add_argument("--max-iters", type=int, default=500)
    bench.add_argument("--timeout", type=float, default=None,
                       help="per-cell budget in seconds; exceeding it censors the row")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out-dir", required=True)
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
