"""Slow, obviously-correct references for testing and baseline timing.

Three things live here: loop-based tensor operations (independent of the
reshape-based implementations in tensor.py), a truncated HOSVD with the
alternating-projections baseline built on it, and a dense mirror of the
sampled solver that materializes every iterate in full.  None of this is
meant for real problem sizes; the loop oracles refuse tensors above a
hard element cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fiber_cur import build_fiber_cur, cur_reconstruct_full, draw_sample_indices
from .linalg import truncated_svd
from .solver import SolverConfig, hard_threshold, sampled_relative_error
from .tensor import (
    DenseTensor,
    IndexSets,
    inf_norm,
    linear_offset,
    mode_product,
    subtensor,
    unfold,
)

__all__ = [
    "TuckerDecomp",
    "naive_unfold",
    "naive_mode_product",
    "hosvd",
    "ap_hosvd_trpca",
    "ReferenceSolveResult",
    "rtcur_dense_reference",
]

# Loop-based oracles are quadratic-ish per element in Python; refuse
# anything that would take minutes.
NAIVE_ELEMENT_CAP = 100_000


def _check_small(t: DenseTensor, what: str) -> None:
    if t.size > NAIVE_ELEMENT_CAP:
        raise ValueError(
            f"{what} is a loop-based reference, refusing {t.size} elements "
            f"(cap {NAIVE_ELEMENT_CAP})"
        )


def _iter_multiindices(shape):
    idx = [1] * len(shape)
    while True:
        yield tuple(idx)
        m = 0
        while m < len(shape):
            idx[m] += 1
            if idx[m] <= shape[m]:
                break
            idx[m] = 1
            m += 1
        if m == len(shape):
            return


def naive_unfold(t: DenseTensor, k: int) -> np.ndarray:
    """Mode-k unfolding assembled entry by entry from the definitions."""
    _check_small(t, "naive_unfold")
    shape = t.shape
    if not 1 <= k <= len(shape):
        raise ValueError(f"mode {k} out of range for {len(shape)}-mode tensor")
    rest = 1
    for m, d in enumerate(shape, start=1):
        if m != k:
            rest *= d
    out = np.zeros((shape[k - 1], rest))
    for idx in _iter_multiindices(shape):
        col = 0
        stride = 1
        for m, (i, d) in enumerate(zip(idx, shape), start=1):
            if m == k:
                continue
            col += (i - 1) * stride
            stride *= d
        out[idx[k - 1] - 1, col] = t.value_at(idx)
    return out


def naive_mode_product(t: DenseTensor, a: np.ndarray, k: int) -> DenseTensor:
    """Mode-k product computed with explicit index loops."""
    _check_small(t, "naive_mode_product")
    shape = t.shape
    if not 1 <= k <= len(shape):
        raise ValueError(f"mode {k} out of range for {len(shape)}-mode tensor")
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != shape[k - 1]:
        raise ValueError(f"matrix {a.shape} cannot contract mode {k} of {shape}")
    new_shape = shape[: k - 1] + (a.shape[0],) + shape[k:]
    out_size = int(np.prod([int(d) for d in new_shape], dtype=np.int64))
    if out_size > NAIVE_ELEMENT_CAP:
        raise ValueError(
            f"naive_mode_product is a loop-based reference, refusing "
            f"{out_size} output elements (cap {NAIVE_ELEMENT_CAP})"
        )
    buf = np.zeros(out_size)
    for idx in _iter_multiindices(new_shape):
        acc = 0.0
        src = list(idx)
        for t_i in range(shape[k - 1]):
            src[k - 1] = t_i + 1
            acc += a[idx[k - 1] - 1, t_i] * t.value_at(tuple(src))
        buf[linear_offset(new_shape, idx)] = acc
    return DenseTensor(buf, new_shape)


@dataclass(frozen=True)
class TuckerDecomp:
    """Orthogonal Tucker factorization: core contracted with the factors."""

    core: DenseTensor
    factors: tuple[np.ndarray, ...]

    def reconstruct(self) -> DenseTensor:
        out = self.core
        for m, f in enumerate(self.factors, start=1):
            out = mode_product(out, f, m)
        return out


def hosvd(t: DenseTensor, ranks) -> TuckerDecomp:
    """Truncated higher-order SVD.

    Factor i holds the leading r_i left singular vectors of the mode-i
    unfolding; the core is t contracted with the factor transposes.
    """
    shape = t.shape
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape):
        raise ValueError(f"{len(ranks)} ranks for a {len(shape)}-mode tensor")
    for m, (r, d) in enumerate(zip(ranks, shape), start=1):
        if not 1 <= r <= d:
            raise ValueError(f"mode {m}: rank {r} outside [1, {d}]")
    factors = tuple(
        truncated_svd(unfold(t, m), r).u for m, r in enumerate(ranks, start=1)
    )
    core = t
    for m, f in enumerate(factors, start=1):
        core = mode_product(core, f.T, m)
    return TuckerDecomp(core=core, factors=factors)


def ap_hosvd_trpca(
    x: DenseTensor,
    ranks,
    zeta0: float | None = None,
    gamma: float = 0.7,
    eps: float = 1e-5,
    max_iters: int = 500,
) -> tuple[DenseTensor, DenseTensor, list[float]]:
    """Full-tensor alternating projections with HOSVD as the low-rank step.

    Structurally the same loop as the sampled solver (same threshold
    schedule, same decay-before-threshold order) so runtime comparisons
    isolate the projection cost; every operation touches the whole
    tensor.  Stops when ||x - L - S||_F / ||x||_F <= eps.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    zeta = float(zeta0) if zeta0 is not None else inf_norm(x)
    if zeta < 0.0:
        raise ValueError(f"zeta0 must be nonnegative, got {zeta}")
    x_flat = x.data
    x_norm = float(np.sqrt(x_flat @ x_flat))
    low = DenseTensor.zeros(x.shape)
    sparse = DenseTensor.zeros(x.shape)
    history: list[float] = []
    for _ in range(int(max_iters)):
        zeta *= gamma
        sparse = DenseTensor(hard_threshold(x_flat - low.data, zeta), x.shape)
        low = hosvd(DenseTensor(x_flat - sparse.data, x.shape), ranks).reconstruct()
        resid = x_flat - low.data - sparse.data
        err = float(np.sqrt(resid @ resid))
        err = 0.0 if x_norm == 0.0 and err == 0.0 else (
            float("inf") if x_norm == 0.0 else err / x_norm
        )
        history.append(err)
        if err <= eps:
            break
    return low, sparse, history


@dataclass(frozen=True)
class ReferenceSolveResult:
    lowrank: DenseTensor
    sparse: DenseTensor
    error_history: tuple[float, ...]
    converged: bool
    trace: tuple[dict, ...]


def rtcur_dense_reference(x: DenseTensor, cfg: SolverConfig) -> ReferenceSolveResult:
    """Dense mirror of the sampled solver, for equivalence testing.

    Follows the identical iteration (same RNG consumption, so the same
    sample indices) but materializes the low-rank iterate in full,
    thresholds the whole tensor, and reads blocks out of full unfoldings.
    The per-iteration trace records the sampled restrictions so they can
    be compared against the block-only solver within tolerance.
    """
    _check_small(x, "rtcur_dense_reference")
    shape = x.shape
    rng = np.random.default_rng(cfg.seed)
    row_sizes, col_sizes = cfg.resolve_sample_sizes(shape)
    idx = draw_sample_indices(shape, row_sizes, col_sizes, rng)
    zeta = float(cfg.zeta0) if cfg.zeta0 is not None else inf_norm(x)
    lcur = None
    low_full = DenseTensor.zeros(shape)
    sparse_full = DenseTensor.zeros(shape)
    history: list[float] = []
    trace: list[dict] = []
    converged = False

    def restrict(t: DenseTensor):
        core = subtensor(t, IndexSets(idx.rows)).to_array()
        fibers = [
            unfold(t, m)[:, cols - 1] for m, cols in enumerate(idx.cols, start=1)
        ]
        return core, fibers

    for k in range(1, cfg.max_iters + 1):
        if cfg.variant == "R" and k >= 2:
            idx = draw_sample_indices(shape, row_sizes, col_sizes, rng)
        zeta *= cfg.gamma
        if lcur is not None:
            low_full = cur_reconstruct_full(lcur)
        sparse_full = DenseTensor(
            hard_threshold(x.data - low_full.data, zeta), shape
        )
        clean = DenseTensor(x.data - sparse_full.data, shape)
        lcur = build_fiber_cur(clean, idx, cfg.ranks)
        low_full = cur_reconstruct_full(lcur)

        x_core, x_fibers = restrict(x)
        l_core, l_fibers = restrict(low_full)
        s_core, s_fibers = restrict(sparse_full)
        e_core = x_core - l_core - s_core
        e_fibers = [xf - lf - sf for xf, lf, sf in zip(x_fibers, l_fibers, s_fibers)]
        err = sampled_relative_error(e_core, e_fibers, x_core, x_fibers)
        history.append(err)
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

    return ReferenceSolveResult(
        lowrank=low_full,
        sparse=sparse_full,
        error_history=tuple(history),
        converged=converged,
        trace=tuple(trace),
    )
