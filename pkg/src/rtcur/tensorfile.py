"""Binary tensor persistence.

Layout, all little-endian:

    bytes 0..3    magic "TNSR"
    bytes 4..5    format version, unsigned 16-bit (currently 1)
    bytes 6..7    mode count n, unsigned 16-bit
    bytes 8..     n extents, unsigned 64-bit each
    then          prod(dims) IEEE-754 doubles, mode-1-fastest order

The payload order matches DenseTensor's flat layout, so writing is a
straight dump of the data view and reading adopts the buffer without a
second copy.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .tensor import DenseTensor

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "TensorFormatError",
    "read_header",
    "read_tensor",
    "write_tensor",
]

MAGIC = b"TNSR"
FORMAT_VERSION = 1


class TensorFormatError(ValueError):
    """Malformed tensor file; the message names the offending byte offset."""


def write_tensor(path, t: DenseTensor) -> None:
    dims = t.shape
    header = MAGIC + struct.pack("<HH", FORMAT_VERSION, len(dims))
    header += struct.pack(f"<{len(dims)}Q", *dims)
    payload = t.data.astype("<f8", copy=False)
    with open(path, "wb") as f:
        f.write(header)
        payload.tofile(f)


def _parse_header(f, path, size):
    """Validated (version, dims, payload offset); f is left at the payload."""
    if size < 8:
        raise TensorFormatError(
            f"{path}: file ends at byte {size}, header needs at least 8 bytes"
        )
    magic = f.read(4)
    if magic != MAGIC:
        raise TensorFormatError(
            f"{path}: bad magic {magic!r} at byte 0, expected {MAGIC!r}"
        )
    version, n = struct.unpack("<HH", f.read(4))
    if version != FORMAT_VERSION:
        raise TensorFormatError(
            f"{path}: unsupported format version {version} at byte 4, "
            f"expected {FORMAT_VERSION}"
        )
    if n < 1:
        raise TensorFormatError(f"{path}: mode count 0 at byte 6")
    dims_end = 8 + 8 * n
    if size < dims_end:
        raise TensorFormatError(
            f"{path}: file ends at byte {size}, {n} extents need bytes "
            f"8..{dims_end - 1}"
        )
    dims = struct.unpack(f"<{n}Q", f.read(8 * n))
    for m, d in enumerate(dims, start=1):
        if d == 0:
            raise TensorFormatError(
                f"{path}: extent 0 for mode {m} at byte {8 + 8 * (m - 1)}"
            )
    return version, dims, dims_end


def read_header(path) -> tuple[int, tuple[int, ...]]:
    """Format version and extents, without touching the payload."""
    size = os.stat(path).st_size
    with open(path, "rb") as f:
        version, dims, _ = _parse_header(f, path, size)
    return version, dims


def read_tensor(path) -> DenseTensor:
    size = os.stat(path).st_size
    with open(path, "rb") as f:
        _, dims, dims_end = _parse_header(f, path, size)
        count = 1
        for d in dims:
            count *= d
        expected = count * 8
        actual = size - dims_end
        if actual != expected:
            raise TensorFormatError(
                f"{path}: payload at byte {dims_end} holds {actual} bytes, "
                f"dims {dims} require {expected}"
            )
        flat = np.fromfile(f, dtype="<f8", count=count)
    if flat.size != count:  # racing truncation after the stat
        raise TensorFormatError(
            f"{path}: payload at byte {dims_end} holds {flat.size * 8} bytes, "
            f"dims {dims} require {expected}"
        )
    flat = flat.astype(np.float64, copy=False)
    return DenseTensor._wrap(np.reshape(flat, dims, order="F"))
