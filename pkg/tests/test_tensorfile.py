import struct

import numpy as np
import pytest

from rtcur.tensor import DenseTensor
from rtcur.tensorfile import (
    FORMAT_VERSION,
    MAGIC,
    TensorFormatError,
    read_tensor,
    write_tensor,
)


def make_file(path, dims, payload_count=None, version=FORMAT_VERSION, magic=MAGIC):
    """Write a raw file with explicit header fields for error-path tests."""
    blob = magic + struct.pack("<HH", version, len(dims))
    blob += struct.pack(f"<{len(dims)}Q", *dims)
    count = payload_count
    if count is None:
        count = 1
        for d in dims:
            count *= d
    blob += np.arange(count, dtype="<f8").tobytes()
    path.write_bytes(blob)
    return path


def test_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    t = DenseTensor(rng.standard_normal(24), (2, 3, 4))
    p = tmp_path / "t.tnsr"
    write_tensor(p, t)
    back = read_tensor(p)
    assert back.shape == (2, 3, 4)
    assert np.array_equal(back.data, t.data)


def test_round_trip_many_shapes(tmp_path):
    rng = np.random.default_rng(1)
    shapes = [(1,), (7,), (3, 5), (2, 3, 4), (2, 2, 2, 3), (1, 9, 1)]
    for i, shape in enumerate(shapes):
        t = DenseTensor(rng.standard_normal(int(np.prod(shape))), shape)
        p = tmp_path / f"t{i}.tnsr"
        write_tensor(p, t)
        back = read_tensor(p)
        assert back.shape == shape
        assert np.array_equal(back.data, t.data)


def test_payload_is_layout_order(tmp_path):
    # bytes after the header are exactly the flat data in layout order
    t = DenseTensor([1, 2, 3, 4, 5, 6], (2, 3))
    p = tmp_path / "t.tnsr"
    write_tensor(p, t)
    raw = p.read_bytes()
    header = MAGIC + struct.pack("<HH", 1, 2) + struct.pack("<QQ", 2, 3)
    assert raw[: len(header)] == header
    assert np.array_equal(
        np.frombuffer(raw[len(header):], dtype="<f8"), [1, 2, 3, 4, 5, 6]
    )


def test_special_values_survive(tmp_path):
    t = DenseTensor([0.0, -0.0, np.inf, -np.inf, np.nan, 1e-308], (6,))
    p = tmp_path / "t.tnsr"
    write_tensor(p, t)
    back = read_tensor(p)
    assert np.array_equal(back.data, t.data, equal_nan=True)
    assert np.signbit(back.data[1])


def test_bad_magic(tmp_path):
    p = make_file(tmp_path / "t.tnsr", (2, 2), magic=b"XXXX")
    with pytest.raises(TensorFormatError, match="byte 0"):
        read_tensor(p)


def test_bad_version(tmp_path):
    p = make_file(tmp_path / "t.tnsr", (2, 2), version=9)
    with pytest.raises(TensorFormatError, match="byte 4"):
        read_tensor(p)


def test_zero_mode_count(tmp_path):
    p = tmp_path / "t.tnsr"
    p.write_bytes(MAGIC + struct.pack("<HH", 1, 0))
    with pytest.raises(TensorFormatError, match="byte 6"):
        read_tensor(p)


def test_zero_extent(tmp_path):
    p = tmp_path / "t.tnsr"
    p.write_bytes(MAGIC + struct.pack("<HH", 1, 2) + struct.pack("<QQ", 3, 0))
    with pytest.raises(TensorFormatError, match="mode 2"):
        read_tensor(p)


def test_truncated_header(tmp_path):
    p = tmp_path / "t.tnsr"
    p.write_bytes(MAGIC + struct.pack("<H", 1))
    with pytest.raises(TensorFormatError, match="byte 6"):
        read_tensor(p)


def test_truncated_dims(tmp_path):
    p = tmp_path / "t.tnsr"
    p.write_bytes(MAGIC + struct.pack("<HH", 1, 3) + struct.pack("<Q", 4))
    with pytest.raises(TensorFormatError, match="3 extents"):
        read_tensor(p)


def test_truncated_payload_names_byte_counts(tmp_path):
    p = make_file(tmp_path / "t.tnsr", (3, 4), payload_count=7)
    with pytest.raises(TensorFormatError) as exc:
        read_tensor(p)
    msg = str(exc.value)
    assert "96" in msg  # 12 doubles expected
    assert "56" in msg  # 7 doubles present


def test_trailing_bytes_rejected(tmp_path):
    p = make_file(tmp_path / "t.tnsr", (2, 2), payload_count=5)
    with pytest.raises(TensorFormatError, match="require 32"):
        read_tensor(p)


def test_video_scale_header_is_accepted(tmp_path):
    # a 4-mode header with hundreds of millions of entries parses fine;
    # the truncation error proves the dims were read, not rejected
    dims = (256, 320, 3, 1250)
    p = make_file(tmp_path / "t.tnsr", dims, payload_count=2)
    with pytest.raises(TensorFormatError) as exc:
        read_tensor(p)
    msg = str(exc.value)
    assert str(256 * 320 * 3 * 1250 * 8) in msg
    assert "(256, 320, 3, 1250)" in msg


def test_empty_file(tmp_path):
    p = tmp_path / "t.tnsr"
    p.write_bytes(b"")
    with pytest.raises(TensorFormatError, match="ends at byte 0"):
        read_tensor(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_tensor(tmp_path / "absent.tnsr")


def test_round_trip_property(tmp_path):
    rng = np.random.default_rng(7)
    for i in range(100):
        n = int(rng.integers(1, 5))
        shape = tuple(int(rng.integers(1, 6)) for _ in range(n))
        t = DenseTensor(rng.standard_normal(int(np.prod(shape))), shape)
        p = tmp_path / f"p{i}.tnsr"
        write_tensor(p, t)
        back = read_tensor(p)
        assert back.shape == shape
        assert np.array_equal(back.data, t.data)
