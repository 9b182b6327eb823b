import numpy as np
import pytest

from rtcur.fiber_cur import cur_reconstruct_full
from rtcur.reference import (
    NAIVE_ELEMENT_CAP,
    ap_hosvd_trpca,
    hosvd,
    naive_mode_product,
    naive_unfold,
    rtcur_dense_reference,
)
from rtcur.solver import SolverConfig, rtcur
from rtcur.synth import InstanceSpec, gen_lowrank, make_instance
from rtcur.tensor import DenseTensor, fro_norm, inf_norm, mode_product, unfold


def rel_err(a: DenseTensor, b: DenseTensor) -> float:
    return fro_norm(DenseTensor(a.data - b.data, a.shape)) / fro_norm(a)


def random_tensor(rng, shape) -> DenseTensor:
    return DenseTensor(rng.standard_normal(int(np.prod(shape))), shape)


# ---------------------------------------------------------------- naive ops


def test_naive_unfold_worked_example():
    t = DenseTensor([1, 2, 3, 4, 5, 6, 7, 8], (2, 2, 2))
    assert np.array_equal(naive_unfold(t, 1), [[1, 3, 5, 7], [2, 4, 6, 8]])
    assert np.array_equal(naive_unfold(t, 2), [[1, 2, 5, 6], [3, 4, 7, 8]])
    assert np.array_equal(naive_unfold(t, 3), [[1, 2, 3, 4], [5, 6, 7, 8]])


def test_naive_unfold_matches_fast_unfold():
    rng = np.random.default_rng(0)
    shapes = [(2,), (3, 4), (2, 3, 4), (3, 2, 2, 2), (5, 1, 4)]
    for shape in shapes:
        t = random_tensor(rng, shape)
        for k in range(1, len(shape) + 1):
            assert np.array_equal(naive_unfold(t, k), unfold(t, k)), (shape, k)


def test_naive_mode_product_matches_fast():
    rng = np.random.default_rng(1)
    for shape in [(3, 4, 2), (2, 2), (4,)]:
        t = random_tensor(rng, shape)
        for k in range(1, len(shape) + 1):
            a = rng.standard_normal((5, shape[k - 1]))
            slow = naive_mode_product(t, a, k)
            fast = mode_product(t, a, k)
            assert slow.shape == fast.shape
            np.testing.assert_allclose(slow.data, fast.data, rtol=1e-12, atol=1e-12)


def test_naive_ops_refuse_large_tensors():
    big = DenseTensor.zeros((50, 50, 50))  # 125000 > cap
    assert big.size > NAIVE_ELEMENT_CAP
    with pytest.raises(ValueError):
        naive_unfold(big, 1)
    with pytest.raises(ValueError):
        naive_mode_product(big, np.eye(50), 1)
    # the guard also applies to the output size
    small = DenseTensor.zeros((3, 3))
    wide = np.zeros((40_000, 3))
    with pytest.raises(ValueError):
        naive_mode_product(small, wide, 1)


def test_naive_ops_validate_mode_and_shape():
    t = DenseTensor.zeros((2, 3))
    with pytest.raises(ValueError):
        naive_unfold(t, 3)
    with pytest.raises(ValueError):
        naive_mode_product(t, np.zeros((2, 5)), 1)


# ------------------------------------------------------------------- hosvd


def test_hosvd_exact_on_lowrank():
    low = gen_lowrank(InstanceSpec(n=3, d=20, r=3, alpha=0.0, seed=4))
    tk = hosvd(low, (3, 3, 3))
    assert tk.core.shape == (3, 3, 3)
    assert rel_err(low, tk.reconstruct()) <= 1e-8


def test_hosvd_lossless_at_full_ranks():
    rng = np.random.default_rng(2)
    t = random_tensor(rng, (4, 5, 6))
    tk = hosvd(t, (4, 5, 6))
    assert rel_err(t, tk.reconstruct()) <= 1e-10


def test_hosvd_factors_orthonormal():
    rng = np.random.default_rng(3)
    t = random_tensor(rng, (6, 7, 5))
    tk = hosvd(t, (3, 2, 4))
    for m, f in enumerate(tk.factors, start=1):
        assert f.shape == (t.shape[m - 1], tk.core.shape[m - 1])
        np.testing.assert_allclose(f.T @ f, np.eye(f.shape[1]), atol=1e-10)


def test_hosvd_error_nonincreasing_in_each_rank():
    rng = np.random.default_rng(5)
    t = random_tensor(rng, (8, 8, 8))

    def err(ranks):
        return rel_err(t, hosvd(t, ranks).reconstruct())

    base = (3, 3, 3)
    e0 = err(base)
    for m in range(3):
        bumped = tuple(r + 1 if i == m else r for i, r in enumerate(base))
        assert err(bumped) <= e0 + 1e-12


def test_hosvd_validates_ranks():
    t = DenseTensor.zeros((4, 4))
    with pytest.raises(ValueError):
        hosvd(t, (4,))
    with pytest.raises(ValueError):
        hosvd(t, (5, 2))
    with pytest.raises(ValueError):
        hosvd(t, (0, 2))


# --------------------------------------------------------------- baseline


def test_ap_hosvd_recovers_corrupted_instance():
    x, low, _ = make_instance(InstanceSpec(n=3, d=20, r=3, alpha=0.05, seed=6))
    est, sparse, history = ap_hosvd_trpca(
        x, (3, 3, 3), zeta0=inf_norm(low), eps=1e-5, max_iters=100
    )
    assert history[-1] <= 1e-5
    assert rel_err(low, est) <= 1e-3
    np.testing.assert_allclose(
        est.data + sparse.data, x.data, atol=1e-4 * inf_norm(x)
    )


def test_ap_hosvd_clean_input_converges_immediately():
    low = gen_lowrank(InstanceSpec(n=3, d=15, r=2, alpha=0.0, seed=7))
    _, _, history = ap_hosvd_trpca(low, (2, 2, 2), eps=1e-5)
    assert len(history) <= 3


def test_ap_hosvd_zero_tensor():
    z = DenseTensor.zeros((4, 4, 4))
    est, sparse, history = ap_hosvd_trpca(z, (2, 2, 2), eps=1e-5)
    assert history == [0.0]
    assert not np.any(est.data)
    assert not np.any(sparse.data)


def test_ap_hosvd_validates_parameters():
    z = DenseTensor.zeros((3, 3))
    with pytest.raises(ValueError):
        ap_hosvd_trpca(z, (2, 2), gamma=1.0)
    with pytest.raises(ValueError):
        ap_hosvd_trpca(z, (2, 2), eps=0.0)
    with pytest.raises(ValueError):
        ap_hosvd_trpca(z, (2, 2), zeta0=-1.0)


def test_ap_hosvd_respects_max_iters():
    x, _, _ = make_instance(InstanceSpec(n=3, d=12, r=2, alpha=0.2, seed=8))
    _, _, history = ap_hosvd_trpca(x, (2, 2, 2), eps=1e-14, max_iters=4)
    assert len(history) == 4


# ------------------------------------------------- dense solver equivalence


@pytest.mark.parametrize("variant", ["F", "R"])
def test_dense_reference_matches_sampled_solver(variant):
    x, low, _ = make_instance(InstanceSpec(n=3, d=10, r=2, alpha=0.1, seed=3))
    cfg = SolverConfig(
        ranks=(2, 2, 2),
        zeta0=inf_norm(low),
        upsilon=2.0,
        seed=5,
        variant=variant,
        max_iters=60,
    )
    fast = rtcur(x, cfg, record_trace=True)
    ref = rtcur_dense_reference(x, cfg)
    assert len(fast.error_history) == len(ref.error_history)
    assert fast.converged == ref.converged
    for ft, rt in zip(fast.trace, ref.trace):
        for a, b in zip(ft["indices"].rows, rt["indices"].rows):
            assert np.array_equal(a, b)
        for a, b in zip(ft["indices"].cols, rt["indices"].cols):
            assert np.array_equal(a, b)
        assert ft["zeta"] == pytest.approx(rt["zeta"], abs=1e-12)
        np.testing.assert_allclose(ft["s_core"], rt["s_core"], atol=1e-10)
        np.testing.assert_allclose(ft["l_core"], rt["l_core"], atol=1e-10)
        for a, b in zip(ft["s_fibers"], rt["s_fibers"]):
            np.testing.assert_allclose(a, b, atol=1e-10)
        for a, b in zip(ft["l_fibers"], rt["l_fibers"]):
            np.testing.assert_allclose(a, b, atol=1e-10)
    for fe, re_ in zip(fast.error_history, ref.error_history):
        assert fe == pytest.approx(re_, abs=1e-10)


def test_dense_reference_final_estimate_matches_cur():
    x, low, _ = make_instance(InstanceSpec(n=3, d=10, r=2, alpha=0.1, seed=9))
    cfg = SolverConfig(ranks=(2, 2, 2), zeta0=inf_norm(low), upsilon=2.0, seed=1)
    fast = rtcur(x, cfg)
    ref = rtcur_dense_reference(x, cfg)
    est = cur_reconstruct_full(fast.cur)
    np.testing.assert_allclose(est.data, ref.lowrank.data, atol=1e-8)


def test_dense_reference_refuses_large_tensors():
    big = DenseTensor.zeros((50, 50, 50))
    cfg = SolverConfig(ranks=(2, 2, 2), seed=0)
    with pytest.raises(ValueError):
        rtcur_dense_reference(big, cfg)
