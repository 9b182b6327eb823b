"""Independent oracles used by the test suite.

Everything here is written deliberately differently from the library:
naive index loops instead of reshapes, and a cyclic Jacobi eigensolver
instead of Householder bidiagonalization, so agreement between the two
routes is meaningful evidence.
"""

from __future__ import annotations

import numpy as np


def oracle_offset(shape, idx):
    """Flat offset by direct accumulation, 1-based idx."""
    off = 0
    stride = 1
    for i, d in zip(idx, shape):
        assert 1 <= i <= d
        off += (i - 1) * stride
        stride *= d
    return off


def all_multiindices(shape):
    """Every 1-based multi-index, first mode varying fastest."""
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


def oracle_column_of(shape, k, idx):
    """Unfolding column (1-based) holding multi-index idx, per the stated ordering."""
    col = 0
    stride = 1
    for m, (i, d) in enumerate(zip(idx, shape), start=1):
        if m == k:
            continue
        col += (i - 1) * stride
        stride *= d
    return col + 1


def oracle_unfold(flat, shape, k):
    """Entry-by-entry mode-k unfolding from the flat buffer."""
    dk = shape[k - 1]
    rest = 1
    for m, d in enumerate(shape, start=1):
        if m != k:
            rest *= d
    out = np.zeros((dk, rest))
    for idx in all_multiindices(shape):
        col = oracle_column_of(shape, k, idx)
        out[idx[k - 1] - 1, col - 1] = flat[oracle_offset(shape, idx)]
    return out


def oracle_mode_product(flat, shape, a, k):
    """Triple-loop mode-k product; returns (flat, new_shape)."""
    new_shape = list(shape)
    new_shape[k - 1] = a.shape[0]
    new_shape = tuple(new_shape)
    out = np.zeros(int(np.prod(new_shape)))
    for idx in all_multiindices(new_shape):
        acc = 0.0
        src = list(idx)
        for t in range(shape[k - 1]):
            src[k - 1] = t + 1
            acc += a[idx[k - 1] - 1, t] * flat[oracle_offset(shape, tuple(src))]
        out[oracle_offset(new_shape, idx)] = acc
    return out, new_shape


def oracle_subtensor(flat, shape, sets):
    """Loop-based restriction; returns (flat, new_shape)."""
    new_shape = tuple(len(s) for s in sets)
    out = np.zeros(int(np.prod(new_shape)))
    for idx in all_multiindices(new_shape):
        src = tuple(s[i - 1] for s, i in zip(sets, idx))
        out[oracle_offset(new_shape, idx)] = flat[oracle_offset(shape, src)]
    return out, new_shape


def jacobi_eigh(a, max_sweeps=80):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues desc, eigenvectors as columns).  Slow but
    self-contained; used as the independent SVD cross-check via the
    Gram matrix.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= 1e-14 * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    lam = np.diag(a).copy()
    order = np.argsort(-lam, kind="stable")
    return lam[order], v[:, order]


def jacobi_singular_values(m):
    """Singular values of m via the Gram-matrix Jacobi route."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape[0] < m.shape[1]:
        m = m.T
    lam, _ = jacobi_eigh(m.T @ m)
    return np.sqrt(np.clip(lam, 0.0, None))
