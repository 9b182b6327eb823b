import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    all_multiindices,
    oracle_mode_product,
    oracle_offset,
    oracle_subtensor,
    oracle_unfold,
)
from rtcur.tensor import (
    DenseTensor,
    IndexSets,
    decode_fiber_columns,
    fiber_base_offsets,
    fiber_column_multiindex,
    fold,
    fro_norm,
    inf_norm,
    linear_offset,
    mode_product,
    mode_stride,
    subtensor,
    unfold,
)

shapes = st.lists(st.integers(1, 6), min_size=1, max_size=4).map(tuple)


def t_from_range(shape):
    n = int(np.prod(shape))
    return DenseTensor(np.arange(1.0, n + 1.0), shape)


def rand_tensor(rng, shape):
    return DenseTensor(rng.standard_normal(int(np.prod(shape))), shape)


# ---------------------------------------------------------------- offsets

def test_linear_offset_corners():
    assert linear_offset((2, 2, 2), (1, 1, 1)) == 0
    assert linear_offset((2, 2, 2), (2, 2, 2)) == 7
    assert linear_offset((3, 4, 5), (2, 3, 4)) == 43


def test_linear_offset_matches_loop_oracle():
    shape = (3, 4, 5)
    for idx in all_multiindices(shape):
        assert linear_offset(shape, idx) == oracle_offset(shape, idx)


@given(shapes, st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_linear_offset_bijection(shape, rnd):
    seen = set()
    for idx in all_multiindices(shape):
        seen.add(linear_offset(shape, idx))
    assert seen == set(range(int(np.prod(shape))))


def test_linear_offset_bounds():
    with pytest.raises(IndexError):
        linear_offset((2, 3), (0, 1))
    with pytest.raises(IndexError):
        linear_offset((2, 3), (1, 4))
    with pytest.raises(ValueError):
        linear_offset((2, 3), (1, 1, 1))


# ---------------------------------------------------------------- tensor type

def test_dense_tensor_validation():
    with pytest.raises(ValueError):
        DenseTensor([1.0, 2.0], (3,))
    with pytest.raises(ValueError):
        DenseTensor([], ())
    with pytest.raises(ValueError):
        DenseTensor([1.0], (1, 0))


def test_dense_tensor_immutable():
    t = t_from_range((2, 3))
    with pytest.raises(ValueError):
        t.to_array()[0, 0] = 9.0
    with pytest.raises(ValueError):
        t.data[0] = 9.0


def test_value_at_uses_layout():
    t = t_from_range((3, 4, 5))
    # entries are 1..60 in layout order, so value == offset + 1
    assert t.value_at((2, 3, 4)) == 44.0


# ---------------------------------------------------------------- unfold/fold

def test_unfold_worked_examples():
    t = t_from_range((2, 2, 2))
    np.testing.assert_array_equal(unfold(t, 1), [[1, 3, 5, 7], [2, 4, 6, 8]])
    np.testing.assert_array_equal(unfold(t, 3), [[1, 2, 3, 4], [5, 6, 7, 8]])


def test_unfold_single_mode_is_column():
    t = t_from_range((4,))
    np.testing.assert_array_equal(unfold(t, 1), [[1], [2], [3], [4]])


def test_unfold_matches_loop_oracle():
    rng = np.random.default_rng(7)
    for shape in [(2, 2, 2), (3, 4, 5), (4, 1, 3, 2), (6,), (2, 9)]:
        t = rand_tensor(rng, shape)
        for k in range(1, len(shape) + 1):
            expect = oracle_unfold(t.data, shape, k)
            np.testing.assert_array_equal(unfold(t, k), expect)


def test_fold_unfold_roundtrip_exact():
    rng = np.random.default_rng(8)
    for shape in [(2, 2, 2), (3, 4, 5), (5, 2, 4, 3), (7,)]:
        t = rand_tensor(rng, shape)
        for k in range(1, len(shape) + 1):
            back = fold(unfold(t, k), k, shape)
            np.testing.assert_array_equal(back.data, t.data)


@given(shapes, st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_fold_unfold_roundtrip_property(shape, seed):
    rng = np.random.default_rng(seed)
    t = rand_tensor(rng, shape)
    for k in range(1, len(shape) + 1):
        np.testing.assert_array_equal(fold(unfold(t, k), k, shape).data, t.data)


def test_fold_shape_errors():
    with pytest.raises(ValueError):
        fold(np.zeros((2, 5)), 1, (2, 2, 2))
    with pytest.raises(ValueError):
        fold(np.zeros((3, 4)), 2, (2, 2, 2))
    with pytest.raises(ValueError):
        unfold(t_from_range((2, 2)), 3)


# ---------------------------------------------------------------- mode product

def test_mode_product_identity():
    t = t_from_range((3, 4, 2))
    out = mode_product(t, np.eye(4), 2)
    np.testing.assert_array_equal(out.data, t.data)


def test_mode_product_worked_example():
    t = t_from_range((2, 2, 2))
    out = mode_product(t, np.array([[1.0, 1.0]]), 1)
    assert out.shape == (1, 2, 2)
    np.testing.assert_array_equal(out.data, [3, 7, 11, 15])


def test_mode_product_matches_loop_oracle():
    rng = np.random.default_rng(9)
    for shape in [(2, 3, 4), (5, 2), (3, 3, 2, 2)]:
        t = rand_tensor(rng, shape)
        for k in range(1, len(shape) + 1):
            a = rng.standard_normal((int(rng.integers(1, 5)), shape[k - 1]))
            got = mode_product(t, a, k)
            expect_flat, expect_shape = oracle_mode_product(t.data, shape, a, k)
            assert got.shape == expect_shape
            np.testing.assert_allclose(got.data, expect_flat, rtol=0, atol=1e-12)


def test_mode_product_unfold_consistency():
    rng = np.random.default_rng(10)
    t = rand_tensor(rng, (4, 5, 3))
    a = rng.standard_normal((6, 5))
    out = mode_product(t, a, 2)
    np.testing.assert_allclose(unfold(out, 2), a @ unfold(t, 2), atol=1e-13)


def test_mode_products_commute_across_modes():
    rng = np.random.default_rng(11)
    t = rand_tensor(rng, (4, 5, 6))
    a = rng.standard_normal((3, 4))
    b = rng.standard_normal((2, 5))
    left = mode_product(mode_product(t, a, 1), b, 2)
    right = mode_product(mode_product(t, b, 2), a, 1)
    denom = fro_norm(left)
    assert fro_norm(DenseTensor(left.data - right.data, left.shape)) <= 1e-12 * denom


def test_mode_product_shape_errors():
    t = t_from_range((2, 3))
    with pytest.raises(ValueError):
        mode_product(t, np.zeros((2, 4)), 2)
    with pytest.raises(ValueError):
        mode_product(t, np.zeros((0, 3)), 2)


# ---------------------------------------------------------------- subtensor

def test_subtensor_examples():
    t = t_from_range((2, 2, 2))
    full = subtensor(t, IndexSets([(1, 2), (1, 2), (1, 2)]))
    np.testing.assert_array_equal(full.data, t.data)
    single = subtensor(t, IndexSets([(2,), (2,), (2,)]))
    assert single.shape == (1, 1, 1)
    assert single.data[0] == 8.0
    mixed = subtensor(t, IndexSets([(1, 2), (2,), (1, 2)]))
    np.testing.assert_array_equal(mixed.data, [3, 4, 7, 8])


def test_subtensor_matches_loop_oracle():
    rng = np.random.default_rng(12)
    shape = (4, 5, 3)
    t = rand_tensor(rng, shape)
    sets = [
        np.sort(rng.choice(np.arange(1, d + 1), size=int(rng.integers(1, d + 1)), replace=False))
        for d in shape
    ]
    got = subtensor(t, IndexSets(sets))
    expect_flat, expect_shape = oracle_subtensor(t.data, shape, [list(map(int, s)) for s in sets])
    assert got.shape == expect_shape
    np.testing.assert_array_equal(got.data, expect_flat)


def test_subtensor_bounds():
    t = t_from_range((2, 2))
    with pytest.raises(IndexError):
        subtensor(t, IndexSets([(1, 3), (1,)]))
    with pytest.raises(IndexError):
        IndexSets([(0, 1), (1,)])
    with pytest.raises(ValueError):
        IndexSets([(), (1,)])


def test_index_sets_normalized():
    s = IndexSets([(3, 1, 3), (2,)])
    np.testing.assert_array_equal(s.sets[0], [1, 3])
    assert s.sizes() == (2, 1)


# ---------------------------------------------------------------- fiber columns

def test_fiber_column_examples():
    assert fiber_column_multiindex((2, 2, 2), 1, 1) == (1, 1)
    assert fiber_column_multiindex((2, 2, 2), 1, 3) == (1, 2)
    assert fiber_column_multiindex((3, 4, 5), 2, 15) == (3, 5)


@given(shapes, st.integers(1, 4), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_fiber_column_roundtrip(shape, k, seed):
    k = 1 + (k - 1) % len(shape)
    rest = int(np.prod([d for j, d in enumerate(shape, 1) if j != k]))
    rng = np.random.default_rng(seed)
    j = int(rng.integers(1, rest + 1))
    idx = fiber_column_multiindex(shape, k, j)
    # re-encode through the documented column formula
    col = 0
    stride = 1
    for i, d in zip(idx, [d for m, d in enumerate(shape, 1) if m != k]):
        col += (i - 1) * stride
        stride *= d
    assert col + 1 == j


def test_fiber_column_consistent_with_unfold():
    rng = np.random.default_rng(13)
    shape = (3, 4, 5)
    t = rand_tensor(rng, shape)
    m = unfold(t, 2)
    for j in (1, 7, 15, 12):
        others = fiber_column_multiindex(shape, 2, j)
        fiber = np.array([
            t.value_at((others[0], i2, others[1])) for i2 in range(1, shape[1] + 1)
        ])
        np.testing.assert_array_equal(m[:, j - 1], fiber)


def test_fiber_base_offsets_and_stride():
    shape = (3, 4, 5)
    rng = np.random.default_rng(14)
    t = rand_tensor(rng, shape)
    for k in (1, 2, 3):
        m = unfold(t, k)
        cols = np.arange(1, m.shape[1] + 1)
        bases = fiber_base_offsets(shape, k, cols)
        stride = mode_stride(shape, k)
        flat = t.data
        for c in range(m.shape[1]):
            fiber = flat[bases[c] + stride * np.arange(shape[k - 1])]
            np.testing.assert_array_equal(fiber, m[:, c])


def test_decode_fiber_columns_bounds():
    with pytest.raises(IndexError):
        decode_fiber_columns((2, 2, 2), 1, np.array([5]))
    with pytest.raises(IndexError):
        fiber_column_multiindex((2, 2, 2), 1, 0)


# ---------------------------------------------------------------- norms

def test_norms_worked_values():
    t = t_from_range((2, 2, 2))
    assert fro_norm(t) == pytest.approx(np.sqrt(204.0), rel=1e-15)
    assert inf_norm(t) == 8.0
    z = DenseTensor.zeros((3, 2))
    assert fro_norm(z) == 0.0
    assert inf_norm(z) == 0.0


def test_fro_norm_homogeneous():
    rng = np.random.default_rng(15)
    t = rand_tensor(rng, (3, 4, 2))
    scaled = DenseTensor(t.data * -2.5, t.shape)
    assert fro_norm(scaled) == pytest.approx(2.5 * fro_norm(t), rel=1e-14)


def test_norm_invariant_under_unfolding():
    rng = np.random.default_rng(16)
    t = rand_tensor(rng, (4, 3, 5))
    f2 = fro_norm(t) ** 2
    for k in (1, 2, 3):
        m = unfold(t, k)
        assert np.sum(m * m) == pytest.approx(f2, rel=1e-13)
