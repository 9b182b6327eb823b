"""Dense n-mode tensor storage and index arithmetic.

Layout contract used across the whole package: generalized column-major,
mode 1 varying fastest, so element (i_1, ..., i_n) with 1-based indices
lives at flat offset sum_m (i_m - 1) * prod_{l<m} d_l.  Mode numbers and
indices are 1-based in every public signature; offsets are 0-based.

All values are float64.  DenseTensor instances are immutable: the wrapped
buffer is marked read-only, and every operation returns a new tensor.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DenseTensor",
    "IndexSets",
    "linear_offset",
    "unfold",
    "fold",
    "mode_product",
    "subtensor",
    "fiber_column_multiindex",
    "decode_fiber_columns",
    "fiber_base_offsets",
    "mode_stride",
    "fro_norm",
    "inf_norm",
]


def _as_shape(dims: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(d) for d in dims)
    if len(shape) == 0:
        raise ValueError("shape needs at least one mode")
    for m, d in enumerate(shape, start=1):
        if d < 1:
            raise ValueError(f"mode {m} has nonpositive extent {d}")
    total = 1
    for d in shape:
        total *= d
        if total >= 2**63:
            raise ValueError(f"element count of shape {shape} is not addressable")
    return shape


def _strides(shape: tuple[int, ...]) -> tuple[int, ...]:
    """Flat stride of each mode: prod of the extents of earlier modes."""
    out = []
    acc = 1
    for d in shape:
        out.append(acc)
        acc *= d
    return tuple(out)


def _check_mode(shape: tuple[int, ...], k: int) -> int:
    if not 1 <= k <= len(shape):
        raise ValueError(f"mode {k} out of range for {len(shape)}-mode tensor")
    return int(k)


class DenseTensor:
    """Immutable dense tensor over float64 with mode-1-fastest layout."""

    __slots__ = ("_array",)

    def __init__(self, data: Iterable[float], shape: Sequence[int]):
        shape = _as_shape(shape)
        flat = np.asarray(data, dtype=np.float64).reshape(-1)
        total = int(np.prod(shape, dtype=np.int64))
        if flat.size != total:
            raise ValueError(
                f"data length {flat.size} does not match shape {shape} "
                f"(expected {total})"
            )
        arr = np.array(flat, dtype=np.float64, copy=True).reshape(shape, order="F")
        arr.flags.writeable = False
        self._array = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "DenseTensor":
        """Adopt an F-contiguous float64 array without copying.

        Internal constructor: the caller must own arr exclusively.
        """
        t = object.__new__(cls)
        if not (arr.flags.f_contiguous and arr.dtype == np.float64 and arr.ndim >= 1):
            raise ValueError("_wrap needs an F-contiguous float64 array")
        _as_shape(arr.shape)
        arr.flags.writeable = False
        t._array = arr
        return t

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "DenseTensor":
        """Copy an n-d array (any layout) into a tensor."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        return cls._wrap(np.array(arr, dtype=np.float64, order="F", copy=True))

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "DenseTensor":
        return cls._wrap(np.zeros(_as_shape(shape), order="F"))

    @property
    def shape(self) -> tuple[int, ...]:
        return self._array.shape

    @property
    def ndim(self) -> int:
        return self._array.ndim

    @property
    def size(self) -> int:
        return self._array.size

    @property
    def data(self) -> np.ndarray:
        """Read-only flat view, mode-1 fastest."""
        return self._array.reshape(-1, order="F")

    def to_array(self) -> np.ndarray:
        """Read-only n-d view of the underlying storage."""
        return self._array

    def value_at(self, idx: Sequence[int]) -> float:
        """Element at a 1-based multi-index."""
        return float(self.data[linear_offset(self.shape, idx)])

    def __repr__(self) -> str:
        return f"DenseTensor(shape={self.shape})"


class IndexSets:
    """Per-mode 1-based selection sets, kept sorted and duplicate-free."""

    __slots__ = ("sets",)

    def __init__(self, sets: Sequence[Sequence[int]]):
        norm = []
        for m, s in enumerate(sets, start=1):
            arr = np.unique(np.asarray(s, dtype=np.int64).reshape(-1))
            if arr.size == 0:
                raise ValueError(f"mode {m}: index set is empty")
            if arr[0] < 1:
                raise IndexError(f"mode {m}: indices must be >= 1, got {arr[0]}")
            arr.flags.writeable = False
            norm.append(arr)
        if not norm:
            raise ValueError("need an index set per mode, got none")
        self.sets = tuple(norm)

    def validate_for(self, shape: Sequence[int]) -> None:
        shape = _as_shape(shape)
        if len(self.sets) != len(shape):
            raise ValueError(
                f"{len(self.sets)} index sets for a {len(shape)}-mode tensor"
            )
        for m, (s, d) in enumerate(zip(self.sets, shape), start=1):
            if s[-1] > d:
                raise IndexError(f"mode {m}: index {s[-1]} exceeds extent {d}")

    def sizes(self) -> tuple[int, ...]:
        return tuple(int(s.size) for s in self.sets)

    def __repr__(self) -> str:
        return f"IndexSets(sizes={self.sizes()})"


def linear_offset(shape: Sequence[int], idx: Sequence[int]) -> int:
    """Flat 0-based offset of a 1-based multi-index."""
    shape = _as_shape(shape)
    if len(idx) != len(shape):
        raise ValueError(f"index {tuple(idx)} has wrong length for shape {shape}")
    off = 0
    stride = 1
    for m, (i, d) in enumerate(zip(idx, shape), start=1):
        i = int(i)
        if not 1 <= i <= d:
            raise IndexError(f"mode {m}: index {i} outside [1, {d}]")
        off += (i - 1) * stride
        stride *= d
    return off


def unfold(t: DenseTensor, k: int) -> np.ndarray:
    """Mode-k unfolding: d_k x prod_{j != k} d_j matrix.

    Column j holds the mode-k fiber at the multi-index
    fiber_column_multiindex(t.shape, k, j).
    """
    k = _check_mode(t.shape, k)
    arr = t.to_array()
    return np.reshape(np.moveaxis(arr, k - 1, 0), (t.shape[k - 1], -1), order="F")


def fold(m: np.ndarray, k: int, shape: Sequence[int]) -> DenseTensor:
    """Inverse of unfold: rebuild the tensor whose mode-k unfolding is m."""
    shape = _as_shape(shape)
    k = _check_mode(shape, k)
    m = np.asarray(m, dtype=np.float64)
    rest = tuple(d for j, d in enumerate(shape, start=1) if j != k)
    total = int(np.prod(rest, dtype=np.int64))
    if m.ndim != 2 or m.shape != (shape[k - 1], total):
        raise ValueError(
            f"matrix of shape {m.shape} cannot fold into {shape} at mode {k} "
            f"(expected ({shape[k - 1]}, {total}))"
        )
    arr = np.moveaxis(m.reshape((shape[k - 1],) + rest, order="F"), 0, k - 1)
    return DenseTensor._wrap(np.asfortranarray(arr))


def mode_product(t: DenseTensor, a: np.ndarray, k: int) -> DenseTensor:
    """Mode-k product: contract a (J x d_k matrix) against mode k of t."""
    k = _check_mode(t.shape, k)
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"mode_product needs a matrix, got ndim={a.ndim}")
    if a.shape[1] != t.shape[k - 1]:
        raise ValueError(
            f"matrix with {a.shape[1]} columns cannot contract mode {k} "
            f"of extent {t.shape[k - 1]}"
        )
    if a.shape[0] < 1:
        raise ValueError("mode_product matrix needs at least one row")
    new_shape = t.shape[: k - 1] + (a.shape[0],) + t.shape[k:]
    return fold(a @ unfold(t, k), k, new_shape)


def subtensor(t: DenseTensor, sel: IndexSets) -> DenseTensor:
    """Restriction of t to the cross product of the selection sets."""
    sel.validate_for(t.shape)
    picks = [s - 1 for s in sel.sets]
    block = t.to_array()[np.ix_(*picks)]
    return DenseTensor._wrap(np.asfortranarray(block))


def mode_stride(shape: Sequence[int], k: int) -> int:
    """Flat distance between consecutive entries of a mode-k fiber."""
    shape = _as_shape(shape)
    k = _check_mode(shape, k)
    return _strides(shape)[k - 1]


def decode_fiber_columns(
    shape: Sequence[int], k: int, cols: np.ndarray
) -> tuple[np.ndarray, ...]:
    """Vectorized inverse of the unfold column map.

    cols holds 1-based column indices of the mode-k unfolding; returns one
    1-based index array per mode != k, in ascending mode order.
    """
    shape = _as_shape(shape)
    k = _check_mode(shape, k)
    cols = np.asarray(cols, dtype=np.int64).reshape(-1)
    others = [d for j, d in enumerate(shape, start=1) if j != k]
    total = int(np.prod(others, dtype=np.int64))
    if cols.size and (cols.min() < 1 or cols.max() > total):
        raise IndexError(f"column index outside [1, {total}] for mode {k} of {shape}")
    rem = cols - 1
    out = []
    for d in others:
        out.append((rem % d) + 1)
        rem = rem // d
    return tuple(out)


def fiber_base_offsets(shape: Sequence[int], k: int, cols: np.ndarray) -> np.ndarray:
    """Flat offsets of the first element of each mode-k fiber in cols."""
    shape = _as_shape(shape)
    k = _check_mode(shape, k)
    parts = decode_fiber_columns(shape, k, cols)
    strides = _strides(shape)
    other_strides = [s for j, s in enumerate(strides, start=1) if j != k]
    base = np.zeros(np.asarray(cols).size, dtype=np.int64)
    for idx, stride in zip(parts, other_strides):
        base += (idx - 1) * stride
    return base


def fiber_column_multiindex(shape: Sequence[int], k: int, j: int) -> tuple[int, ...]:
    """Multi-index (over modes != k) addressed by column j of the mode-k unfolding."""
    parts = decode_fiber_columns(shape, k, np.asarray([j], dtype=np.int64))
    return tuple(int(p[0]) for p in parts)


def fro_norm(t: DenseTensor) -> float:
    flat = t.data
    return float(np.sqrt(flat @ flat))


def inf_norm(t: DenseTensor) -> float:
    return float(np.max(np.abs(t.data)))
