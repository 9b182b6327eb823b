"""Alternating projections between the sparse and low-multilinear-rank sets.

Each iteration works only on sampled blocks: the core block at the
row sets plus one fiber-column block per mode.  The low-rank iterate is
held as a FiberCur and evaluated restricted; a full low-rank tensor is
never materialized.  Iteration order:

    (variant R, from the second iteration: redraw the sample)
    zeta <- gamma * zeta                      (decay first, so the first
                                               applied threshold is
                                               gamma * zeta0)
    S blocks  <- hard_threshold(X - L, zeta)  on the sampled blocks
    L         <- CUR assembled from the cleaned blocks X - S
    e         <- sampled relative error of X - L - S

and the loop stops at e <= eps or max_iters.  Variant F keeps one sample
throughout; variant R redraws every iteration (the stopping-rule
denominator is recomputed along with it), so with equal seeds the first
iteration of both variants is identical.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from . import _backend
from .fiber_cur import (
    FiberCur,
    SampleIndices,
    assemble_fiber_cur,
    cur_eval_fibers,
    cur_eval_subtensor,
    draw_sample_indices,
    sample_sizes,
)
from .tensor import (
    DenseTensor,
    IndexSets,
    _as_shape,
    fiber_base_offsets,
    mode_stride,
    subtensor,
)

__all__ = [
    "SolverConfig",
    "SparseEstimate",
    "SolveResult",
    "TensorAccessor",
    "DenseTensorAccessor",
    "hard_threshold",
    "zeta_schedule",
    "sampled_relative_error",
    "rtcur",
    "support_projection_check",
]

# Intersections whose trailing retained singular value falls below this
# fraction of the leading one are flagged rank-deficient in diagnostics.
RANK_DEFICIENCY_RTOL = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    """Solve parameters.

    zeta0 = None means "use the infinity norm of the observed tensor".
    row_sample_sizes / col_sample_sizes, when given, override the sizes
    derived from upsilon.
    """

    ranks: tuple[int, ...]
    eps: float = 1e-5
    zeta0: float | None = None
    gamma: float = 0.7
    upsilon: float = 3.0
    variant: str = "F"
    max_iters: int = 500
    seed: int | None = None
    row_sample_sizes: tuple[int, ...] | None = None
    col_sample_sizes: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        object.__setattr__(self, "variant", str(self.variant).upper())
        if len(self.ranks) == 0 or any(r < 1 for r in self.ranks):
            raise ValueError(f"ranks must be positive, got {self.ranks}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.eps > 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.zeta0 is not None and not self.zeta0 >= 0.0:
            raise ValueError(f"zeta0 must be nonnegative, got {self.zeta0}")
        if not self.upsilon > 0.0:
            raise ValueError(f"upsilon must be positive, got {self.upsilon}")
        if self.variant not in ("F", "R"):
            raise ValueError(f"variant must be 'F' or 'R', got {self.variant!r}")
        if int(self.max_iters) < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        object.__setattr__(self, "max_iters", int(self.max_iters))
        for name in ("row_sample_sizes", "col_sample_sizes"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(int(s) for s in v))

    def resolve_sample_sizes(
        self, shape: Sequence[int]
    ) -> tuple[tuple[int, ...], tuple[int, ...]]:
        rows, cols = sample_sizes(shape, self.ranks, self.upsilon)
        if self.row_sample_sizes is not None:
            rows = self.row_sample_sizes
        if self.col_sample_sizes is not None:
            cols = self.col_sample_sizes
        return rows, cols


@dataclass(frozen=True)
class SparseEstimate:
    """Sparse-component values on the sampled positions only."""

    core: np.ndarray
    fibers: tuple[np.ndarray, ...]
    indices: SampleIndices


@dataclass(frozen=True)
class SolveResult:
    cur: FiberCur
    sparse: SparseEstimate
    error_history: tuple[float, ...]
    iterations: int
    converged: bool
    diagnostics: tuple[tuple[bool, ...], ...]  # per-iteration, per-mode rank deficiency
    timings: dict[str, float]
    zeta_final: float
    config: SolverConfig
    trace: tuple[dict, ...] | None = None


class TensorAccessor(Protocol):
    """Sampled-entry view of the observed tensor.

    The solver touches the data only through these calls, so any source
    that can produce blocks (in-memory tensor, memory-mapped file, ...)
    can drive a solve.
    """

    @property
    def shape(self) -> tuple[int, ...]: ...

    def core_block(self, rows: tuple[np.ndarray, ...]) -> np.ndarray: ...

    def fiber_block(self, k: int, cols: np.ndarray) -> np.ndarray: ...

    def inf_norm(self) -> float: ...


class DenseTensorAccessor:
    """TensorAccessor over an in-memory DenseTensor."""

    def __init__(self, t: DenseTensor):
        self._t = t

    @property
    def shape(self) -> tuple[int, ...]:
        return self._t.shape

    def core_block(self, rows: tuple[np.ndarray, ...]) -> np.ndarray:
        return subtensor(self._t, IndexSets(rows)).to_array()

    def fiber_block(self, k: int, cols: np.ndarray) -> np.ndarray:
        shape = self._t.shape
        bases = fiber_base_offsets(shape, k, cols)
        return np.asarray(
            _backend.gather_columns(
                self._t.data, bases, mode_stride(shape, k), shape[k - 1]
            )
        )

    def inf_norm(self) -> float:
        # chunked so no full-size |x| temporary is allocated
        flat = self._t.data
        best = 0.0
        step = 1 << 18
        for start in range(0, flat.size, step):
            chunk = flat[start : start + step]
            best = max(best, float(np.max(np.abs(chunk))))
        return best


def hard_threshold(values: np.ndarray, zeta: float) -> np.ndarray:
    """Keep entries with |x| strictly above zeta, zero the rest."""
    if not zeta >= 0.0:
        raise ValueError(f"threshold must be nonnegative, got {zeta}")
    return _backend.hard_threshold(np.asarray(values, dtype=np.float64), float(zeta))


def zeta_schedule(zeta0: float, gamma: float, k: int) -> float:
    """Threshold level after k decay steps: gamma**k * zeta0."""
    if k < 0:
        raise ValueError(f"step count must be >= 0, got {k}")
    return float(gamma) ** int(k) * float(zeta0)


def _block_norm(core: np.ndarray, fibers: Sequence[np.ndarray]) -> float:
    total = float(np.sqrt(np.sum(core * core)))
    for f in fibers:
        total += float(np.sqrt(np.sum(f * f)))
    return total


def sampled_relative_error(
    e_core: np.ndarray,
    e_fibers: Sequence[np.ndarray],
    x_core: np.ndarray,
    x_fibers: Sequence[np.ndarray],
) -> float:
    """Residual norm over observed norm, both summed across sampled blocks.

    All-zero observed samples give 0 when the residual is also zero and
    +inf otherwise.
    """
    num = _block_norm(e_core, e_fibers)
    den = _block_norm(x_core, x_fibers)
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return num / den


def _gather_blocks(
    acc: TensorAccessor, idx: SampleIndices
) -> tuple[np.ndarray, list[np.ndarray]]:
    core = acc.core_block(idx.rows)
    fibers = [acc.fiber_block(k, cols) for k, cols in enumerate(idx.cols, start=1)]
    return core, fibers


def _eval_blocks(
    cur: FiberCur, idx: SampleIndices
) -> tuple[np.ndarray, list[np.ndarray]]:
    core = cur_eval_subtensor(cur, IndexSets(idx.rows)).to_array()
    fibers = [
        cur_eval_fibers(cur, k, cols) for k, cols in enumerate(idx.cols, start=1)
    ]
    return core, fibers


def _deficiency_flags(cur: FiberCur) -> tuple[bool, ...]:
    flags = []
    for inter in cur.intersections:
        s = inter.singular_values
        flags.append(bool(s[0] <= 0.0 or s[-1] <= RANK_DEFICIENCY_RTOL * s[0]))
    return tuple(flags)


def rtcur(
    x: DenseTensor | TensorAccessor,
    cfg: SolverConfig,
    record_trace: bool = False,
) -> SolveResult:
    """Separate a sampled observation into low-multilinear-rank + sparse.

    Runs the alternating loop described in the module docstring.  Never
    converging within max_iters is reported via converged=False, not an
    exception.  record_trace keeps per-iteration blocks for equivalence
    tests; leave it off for real problem sizes.
    """
    acc: TensorAccessor = (
        DenseTensorAccessor(x) if isinstance(x, DenseTensor) else x
    )
    shape = _as_shape(acc.shape)
    if len(cfg.ranks) != len(shape):
        raise ValueError(f"{len(cfg.ranks)} ranks for a {len(shape)}-mode tensor")
    for m, (r, d) in enumerate(zip(cfg.ranks, shape), start=1):
        if r > d:
            raise ValueError(f"mode {m}: rank {r} exceeds extent {d}")

    timings: dict[str, float] = {
        "sample": 0.0,
        "gather": 0.0,
        "eval_lowrank": 0.0,
        "threshold": 0.0,
        "build": 0.0,
        "error": 0.0,
        "total": 0.0,
    }
    t_start = time.perf_counter()

    rng = np.random.default_rng(cfg.seed)
    row_sizes, col_sizes = cfg.resolve_sample_sizes(shape)

    t0 = time.perf_counter()
    idx = draw_sample_indices(shape, row_sizes, col_sizes, rng)
    timings["sample"] += time.perf_counter() - t0

    t0 = time.perf_counter()
    x_core, x_fibers = _gather_blocks(acc, idx)
    timings["gather"] += time.perf_counter() - t0

    zeta = float(cfg.zeta0) if cfg.zeta0 is not None else acc.inf_norm()
    lcur: FiberCur | None = None
    lblocks: tuple[np.ndarray, list[np.ndarray]] | None = None
    history: list[float] = []
    flags: list[tuple[bool, ...]] = []
    trace: list[dict] = []
    converged = False
    s_core = np.zeros_like(x_core)
    s_fibers = [np.zeros_like(f) for f in x_fibers]

    for k in range(1, cfg.max_iters + 1):
        if cfg.variant == "R" and k >= 2:
            t0 = time.perf_counter()
            idx = draw_sample_indices(shape, row_sizes, col_sizes, rng)
            timings["sample"] += time.perf_counter() - t0
            t0 = time.perf_counter()
            x_core, x_fibers = _gather_blocks(acc, idx)
            timings["gather"] += time.perf_counter() - t0
            lblocks = None  # sample moved; cached evaluation is stale

        zeta *= cfg.gamma

        t0 = time.perf_counter()
        if lcur is None:
            l_core = np.zeros_like(x_core)
            l_fibers = [np.zeros_like(f) for f in x_fibers]
        elif lblocks is None:
            l_core, l_fibers = _eval_blocks(lcur, idx)
        else:
            l_core, l_fibers = lblocks
        timings["eval_lowrank"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        s_core = hard_threshold(x_core - l_core, zeta)
        s_fibers = [
            hard_threshold(xf - lf, zeta) for xf, lf in zip(x_fibers, l_fibers)
        ]
        timings["threshold"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        clean_core = DenseTensor._wrap(np.asfortranarray(x_core - s_core))
        clean_fibers = tuple(xf - sf for xf, sf in zip(x_fibers, s_fibers))
        lcur = assemble_fiber_cur(clean_core, clean_fibers, idx, cfg.ranks)
        flags.append(_deficiency_flags(lcur))
        timings["build"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        l_core, l_fibers = _eval_blocks(lcur, idx)
        lblocks = (l_core, l_fibers)
        e_core = x_core - l_core - s_core
        e_fibers = [xf - lf - sf for xf, lf, sf in zip(x_fibers, l_fibers, s_fibers)]
        err = sampled_relative_error(e_core, e_fibers, x_core, x_fibers)
        timings["error"] += time.perf_counter() - t0
        history.append(err)

        if record_trace:
            trace.append(
                {
                    "iteration": k,
                    "zeta": zeta,
                    "indices": idx,
                    "s_core": s_core,
                    "s_fibers": tuple(s_fibers),
                    "l_core": l_core,
                    "l_fibers": tuple(l_fibers),
                    "error": err,
                }
            )

        if err <= cfg.eps:
            converged = True
            break

    timings["total"] = time.perf_counter() - t_start
    return SolveResult(
        cur=lcur,
        sparse=SparseEstimate(core=s_core, fibers=tuple(s_fibers), indices=idx),
        error_history=tuple(history),
        iterations=len(history),
        converged=converged,
        diagnostics=tuple(flags),
        timings=timings,
        zeta_final=zeta,
        config=cfg,
        trace=tuple(trace) if record_trace else None,
    )


def support_projection_check(
    l_star: DenseTensor, l_k: DenseTensor, s_star: DenseTensor
) -> tuple[bool, bool]:
    """Thresholding-step guarantees, checkable when ground truth is known.

    With zeta = ||l_star - l_k||_inf and s_next = HT_zeta(x - l_k) for
    x = l_star + s_star, returns
      (support of s_next is contained in support of s_star,
       ||s_star - s_next||_inf <= 2 * zeta).
    """
    if l_star.shape != l_k.shape or l_star.shape != s_star.shape:
        raise ValueError("shape mismatch between ground truth and iterate")
    gap = l_star.data - l_k.data
    zeta = float(np.max(np.abs(gap)))
    x = l_star.data + s_star.data
    s_next = hard_threshold(x - l_k.data, zeta)
    support_ok = bool(np.all((s_next != 0.0) <= (s_star.data != 0.0)))
    magnitude_ok = bool(np.max(np.abs(s_star.data - s_next)) <= 2.0 * zeta + 1e-12)
    return support_ok, magnitude_ok
