"""Fiber-sampled CUR decompositions of dense tensors.

A decomposition is assembled from a per-mode sample: row subsets I_i of
[d_i] and fiber-column subsets J_i of the mode-i unfolding's columns.
The stored pieces are the core subtensor T(I_1, ..., I_n), the sampled
fiber matrices C_i = unfold(T, i)[:, J_i] (gathered directly from the
flat buffer; the full unfolding is never materialized), and rank-r_i
truncated factorizations of the intersections C_i(I_i, :).

The represented tensor core x_i (C_i pinv(U_i)) is always evaluated
restricted: full reconstruction exists for tests and small problems, the
solver only ever asks for sampled blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import gather_columns
from .linalg import TruncatedSvd, truncated_svd
from .tensor import (
    DenseTensor,
    IndexSets,
    _as_shape,
    decode_fiber_columns,
    fiber_base_offsets,
    mode_product,
    mode_stride,
    subtensor,
)

__all__ = [
    "SampleIndices",
    "FiberCur",
    "sample_sizes",
    "sample_indices",
    "draw_sample_indices",
    "build_fiber_cur",
    "assemble_fiber_cur",
    "cur_reconstruct_full",
    "cur_eval_subtensor",
    "cur_eval_fibers",
]


@dataclass(frozen=True)
class SampleIndices:
    """Per-mode 1-based sample index sets, each sorted and duplicate-free.

    rows[i] subsets [d_{i+1}]; cols[i] subsets the column range of the
    mode-(i+1) unfolding.
    """

    rows: tuple[np.ndarray, ...]
    cols: tuple[np.ndarray, ...]

    def row_sizes(self) -> tuple[int, ...]:
        return tuple(int(r.size) for r in self.rows)

    def col_sizes(self) -> tuple[int, ...]:
        return tuple(int(c.size) for c in self.cols)

    def validate_for(self, shape: Sequence[int]) -> None:
        shape = _as_shape(shape)
        n = len(shape)
        if len(self.rows) != n or len(self.cols) != n:
            raise ValueError(
                f"sample has {len(self.rows)} row sets / {len(self.cols)} "
                f"column sets for a {n}-mode tensor"
            )
        total = int(np.prod(shape, dtype=np.int64))
        for m, (r, c, d) in enumerate(zip(self.rows, self.cols, shape), start=1):
            if r.size == 0 or c.size == 0:
                raise ValueError(f"mode {m}: empty sample set")
            if r[0] < 1 or r[-1] > d:
                raise IndexError(f"mode {m}: row index outside [1, {d}]")
            rest = total // d
            if c[0] < 1 or c[-1] > rest:
                raise IndexError(f"mode {m}: fiber column outside [1, {rest}]")


@dataclass(frozen=True)
class FiberCur:
    """Sampled CUR decomposition.

    core:           subtensor at the row sets, shape (|I_1|, ..., |I_n|)
    fibers:         C_i, one d_i x |J_i| matrix per mode
    intersections:  rank-r_i factorization of C_i(I_i, :) per mode
    indices:        the sample that produced the pieces
    factors:        cached products C_i @ pinv(intersections[i]),
                    d_i x |I_i|; every evaluation is a contraction of the
                    core against rows of these
    """

    core: DenseTensor
    fibers: tuple[np.ndarray, ...]
    intersections: tuple[TruncatedSvd, ...]
    indices: SampleIndices
    factors: tuple[np.ndarray, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.fibers)


def sample_sizes(
    shape: Sequence[int], ranks: Sequence[int], upsilon: float
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Per-mode sample counts (|I_i|, |J_i|).

    |I_i| = min(d_i, ceil(upsilon * r_i * ln d_i)) and |J_i| uses the
    same formula over the fiber-column count prod_{j != i} d_j, with a
    floor of r_i so the intersection can reach the target rank.
    """
    shape = _as_shape(shape)
    ranks = _check_ranks(shape, ranks)
    if not upsilon > 0:
        raise ValueError(f"sampling constant must be positive, got {upsilon}")
    total = int(np.prod(shape, dtype=np.int64))
    row_sizes = []
    col_sizes = []
    for d, r in zip(shape, ranks):
        rest = total // d
        row_sizes.append(min(d, max(r, math.ceil(upsilon * r * math.log(d)))))
        col_sizes.append(min(rest, max(r, math.ceil(upsilon * r * math.log(rest)))))
    return tuple(row_sizes), tuple(col_sizes)


def sample_indices(
    shape: Sequence[int],
    ranks: Sequence[int],
    upsilon: float,
    rng: np.random.Generator,
) -> SampleIndices:
    """Draw a uniform without-replacement sample of rows and fiber columns.

    Sizes come from sample_sizes; the draw order is fixed (I_1..I_n,
    then J_1..J_n) so equal seeds give equal samples.
    """
    row_sizes, col_sizes = sample_sizes(shape, ranks, upsilon)
    return draw_sample_indices(shape, row_sizes, col_sizes, rng)


def draw_sample_indices(
    shape: Sequence[int],
    row_sizes: Sequence[int],
    col_sizes: Sequence[int],
    rng: np.random.Generator,
) -> SampleIndices:
    """Draw a sample with explicit per-mode cardinalities."""
    shape = _as_shape(shape)
    n = len(shape)
    if len(row_sizes) != n or len(col_sizes) != n:
        raise ValueError(f"need {n} row and column sizes for shape {shape}")
    total = int(np.prod(shape, dtype=np.int64))
    for m, (d, rs, cs) in enumerate(zip(shape, row_sizes, col_sizes), start=1):
        if not 1 <= int(rs) <= d:
            raise ValueError(f"mode {m}: row sample size {rs} outside [1, {d}]")
        if not 1 <= int(cs) <= total // d:
            raise ValueError(
                f"mode {m}: column sample size {cs} outside [1, {total // d}]"
            )
    rows = tuple(
        _draw_without_replacement(rng, d, int(sz)) for d, sz in zip(shape, row_sizes)
    )
    cols = tuple(
        _draw_without_replacement(rng, total // d, int(sz))
        for d, sz in zip(shape, col_sizes)
    )
    return SampleIndices(rows=rows, cols=cols)


def _check_ranks(shape: tuple[int, ...], ranks: Sequence[int]) -> tuple[int, ...]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape):
        raise ValueError(f"{len(ranks)} ranks for a {len(shape)}-mode tensor")
    for m, (r, d) in enumerate(zip(ranks, shape), start=1):
        if r < 1:
            raise ValueError(f"mode {m}: rank must be >= 1, got {r}")
        if r > d:
            raise ValueError(f"mode {m}: rank {r} exceeds extent {d}")
    return ranks


def _draw_without_replacement(
    rng: np.random.Generator, population: int, k: int
) -> np.ndarray:
    """k distinct 1-based values from [1, population], uniform, sorted.

    Small populations shuffle; large ones keep the first k distinct
    values of an iid stream (same law, no O(population) memory).
    """
    if k >= population:
        return np.arange(1, population + 1, dtype=np.int64)
    if 3 * k >= population:
        picked = rng.permutation(population)[:k]
        return np.sort(picked.astype(np.int64)) + 1
    out = np.empty(0, dtype=np.int64)
    while out.size < k:
        need = k - out.size
        batch = rng.integers(0, population, size=need + need // 2 + 16, dtype=np.int64)
        merged = np.concatenate([out, batch])
        _, first = np.unique(merged, return_index=True)
        out = merged[np.sort(first)]
    return np.sort(out[:k]) + 1


def build_fiber_cur(
    t: DenseTensor, idx: SampleIndices, ranks: Sequence[int]
) -> FiberCur:
    """Assemble the decomposition pieces for one sample of t."""
    shape = t.shape
    idx.validate_for(shape)
    flat = t.data
    core = subtensor(t, IndexSets(idx.rows))
    fibers = []
    for m, cols in enumerate(idx.cols, start=1):
        bases = fiber_base_offsets(shape, m, cols)
        fibers.append(
            np.asarray(gather_columns(flat, bases, mode_stride(shape, m), shape[m - 1]))
        )
    return assemble_fiber_cur(core, tuple(fibers), idx, ranks)


def assemble_fiber_cur(
    core: DenseTensor,
    fibers: Sequence[np.ndarray],
    idx: SampleIndices,
    ranks: Sequence[int],
) -> FiberCur:
    """Build a FiberCur from already-extracted sampled blocks.

    core must be the block at idx.rows and fibers[i] the d_i x |J_i|
    column gather of mode i+1; the intersections are factorized here.
    The solver uses this directly because its cleaned samples exist only
    as blocks, never as a full tensor.
    """
    shape = tuple(int(f.shape[0]) for f in fibers)
    ranks = _check_ranks(shape, ranks)
    if core.shape != idx.row_sizes():
        raise ValueError(
            f"core shape {core.shape} does not match sample row sizes "
            f"{idx.row_sizes()}"
        )
    for m, (rows, cols, rk, fib) in enumerate(
        zip(idx.rows, idx.cols, ranks, fibers), start=1
    ):
        if fib.shape[1] != cols.size:
            raise ValueError(
                f"mode {m}: fiber block has {fib.shape[1]} columns, "
                f"sample has {cols.size}"
            )
        if rk > rows.size or rk > cols.size:
            raise ValueError(
                f"mode {m}: rank {rk} exceeds sample sizes "
                f"(|rows|={rows.size}, |cols|={cols.size})"
            )
    intersections = []
    factors = []
    for rows, rk, fib in zip(idx.rows, ranks, fibers):
        inter = truncated_svd(fib[rows - 1, :], rk)
        intersections.append(inter)
        factors.append(fib @ inter.pinv())
    return FiberCur(
        core=core,
        fibers=tuple(fibers),
        intersections=tuple(intersections),
        indices=idx,
        factors=tuple(factors),
    )


def cur_reconstruct_full(f: FiberCur) -> DenseTensor:
    """Materialize the represented tensor: core x_i factors[i].

    Only sensible for small shapes; the solver never calls this.
    """
    out = f.core
    for m, factor in enumerate(f.factors, start=1):
        out = mode_product(out, factor, m)
    return out


def cur_eval_subtensor(f: FiberCur, sel: IndexSets) -> DenseTensor:
    """Restriction of the represented tensor to sel, without materializing it."""
    sel.validate_for(f.shape)
    out = f.core
    for m, (factor, rows) in enumerate(zip(f.factors, sel.sets), start=1):
        out = mode_product(out, factor[rows - 1, :], m)
    return out


def cur_eval_fibers(f: FiberCur, k: int, cols: np.ndarray) -> np.ndarray:
    """Columns cols of the mode-k unfolding of the represented tensor.

    Each column j is decoded to its multi-index over the other modes;
    the core is contracted with the matching rows of the other modes'
    factors, then mapped through mode k's factor.  Cost is independent
    of the full tensor volume.
    """
    shape = f.shape
    n = len(shape)
    if not 1 <= k <= n:
        raise ValueError(f"mode {k} out of range for {n}-mode tensor")
    cols = np.asarray(cols, dtype=np.int64).reshape(-1)
    parts = decode_fiber_columns(shape, k, cols)  # validates bounds

    core = f.core.to_array()
    other_modes = [m for m in range(1, n + 1) if m != k]
    if not other_modes:
        small = np.repeat(core.reshape(-1, 1), cols.size, axis=1)
        return f.factors[k - 1] @ small

    # One batched contraction: rows of each other mode's factor, selected
    # by the decoded multi-indices, share the column batch axis.
    batch_axis = n
    operands = [core, list(range(n))]
    for m, rows in zip(other_modes, parts):
        operands.append(f.factors[m - 1][rows - 1, :])
        operands.append([batch_axis, m - 1])
    small = np.einsum(*operands, [k - 1, batch_axis], optimize=True)
    return f.factors[k - 1] @ small
