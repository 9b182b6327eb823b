"""Pure-numpy kernel implementations (fallback backend).

Both backends expose the same three callables with identical contracts:

    dense_svd(a)          economy SVD of a 2-d float64 array, built from
                          first principles
    hard_threshold(a, z)  entrywise keep-if-strictly-above-z
    gather_columns(...)   strided fiber gather out of a flat buffer

The SVD is deliberately self-contained: Householder bidiagonalization
followed by implicit-shift QR sweeps on the bidiagonal, using only
elementwise array arithmetic and matrix multiplication.  No LAPACK
factorization routine is called here or anywhere else in the library.
"""

from __future__ import annotations

import numpy as np

_EPS = float(np.finfo(np.float64).eps)

# Implicit-shift QR converges in a handful of sweeps per singular value;
# this cap only trips on pathological (non-finite) input.
_MAX_SWEEPS = 75

BACKEND_NAME = "python"


def dense_svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Economy SVD of a real matrix: a == u @ diag(s) @ vt.

    Returns (u, s, vt) with shapes (m, q), (q,), (q, p) where
    q = min(m, p).  Singular values are nonnegative and sorted in
    descending order.  Raises ArithmeticError if a QR sweep fails to
    converge (only reachable with non-finite input).
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"dense_svd expects a 2-d array, got ndim={a.ndim}")
    m, p = a.shape
    if m == 0 or p == 0:
        raise ValueError(f"dense_svd expects a nonempty matrix, got shape {a.shape}")
    if m < p:
        # Tall case does all the work; transpose swaps the roles of U and V.
        u, s, vt = dense_svd(a.T)
        return vt.T, s, u.T

    d, sup, left_vs, right_vs = _bidiagonalize(a)
    ubig, vbig = _accumulate_householders(m, p, left_vs, right_vs)
    s, pacc, qacc = _qr_diagonalize(d, sup)

    u = ubig @ pacc
    v = vbig @ qacc
    return u, s, v.T


def _bidiagonalize(a: np.ndarray):
    """Reduce a tall matrix (m >= p) to upper bidiagonal form.

    Returns (d, sup, left_vs, right_vs): the diagonal, the superdiagonal
    (sup[i] sits left of d[i], sup[0] == 0), and the Householder unit
    vectors applied from the left and right.  A None entry means that
    step needed no reflection.
    """
    m, p = a.shape
    work = a.copy()
    d = np.zeros(p)
    sup = np.zeros(p)
    left_vs: list[np.ndarray | None] = [None] * p
    right_vs: list[np.ndarray | None] = [None] * p

    for k in range(p):
        x = work[k:, k]
        nx = np.sqrt(float(x @ x))
        if nx > 0.0:
            beta = -np.copysign(nx, x[0])
            v = x.copy()
            v[0] -= beta
            v /= np.sqrt(float(v @ v))
            # Column k becomes (beta, 0, ..., 0) analytically; only the
            # trailing block needs the actual reflection.
            blk = work[k:, k + 1 :]
            blk -= 2.0 * np.outer(v, v @ blk)
            left_vs[k] = v
            d[k] = beta
        if k < p - 2:
            x = work[k, k + 1 :]
            nx = np.sqrt(float(x @ x))
            if nx > 0.0:
                beta = -np.copysign(nx, x[0])
                w = x.copy()
                w[0] -= beta
                w /= np.sqrt(float(w @ w))
                blk = work[k + 1 :, k + 1 :]
                blk -= 2.0 * np.outer(blk @ w, w)
                right_vs[k] = w
                sup[k + 1] = beta
        elif k == p - 2:
            sup[k + 1] = work[k, k + 1]
    return d, sup, left_vs, right_vs


def _accumulate_householders(m, p, left_vs, right_vs):
    """Multiply the stored reflectors back together (in reverse order)."""
    ubig = np.eye(m, p)
    for k in range(p - 1, -1, -1):
        v = left_vs[k]
        if v is not None:
            blk = ubig[k:, k:]
            blk -= 2.0 * np.outer(v, v @ blk)
    vbig = np.eye(p)
    for k in range(p - 3, -1, -1):
        w = right_vs[k]
        if w is not None:
            blk = vbig[k + 1 :, k + 1 :]
            blk -= 2.0 * np.outer(w, w @ blk)
    return ubig, vbig


def _qr_diagonalize(d: np.ndarray, sup: np.ndarray):
    """Implicit-shift QR on an upper bidiagonal matrix.

    d is the diagonal, sup the superdiagonal with sup[i] left of d[i]
    (sup[0] == 0).  Returns (s, pacc, qacc) where s holds the singular
    values sorted descending and pacc/qacc are the accumulated left and
    right rotation products, column-permuted to match s.
    """
    p = d.size
    d = d.copy()
    sup = sup.copy()
    pacc = np.eye(p)
    qacc = np.eye(p)
    anorm = float(np.max(np.abs(d) + np.abs(sup)))
    tol = _EPS * anorm

    for k in range(p - 1, -1, -1):
        for sweep in range(_MAX_SWEEPS):
            # Find the largest l such that sup[l] is negligible (split
            # point), or a negligible d[l-1] that allows cancelling
            # sup[l] explicitly.  sup[0] == 0 guarantees termination.
            cancel = True
            l = k
            while True:
                if abs(sup[l]) <= tol:
                    cancel = False
                    break
                if abs(d[l - 1]) <= tol:
                    break
                l -= 1

            if cancel:
                # d[l-1] is negligible: rotate sup[l..k] away against it.
                c, s = 0.0, 1.0
                for i in range(l, k + 1):
                    f = s * sup[i]
                    sup[i] = c * sup[i]
                    if abs(f) <= tol:
                        break
                    g = d[i]
                    h = np.hypot(f, g)
                    d[i] = h
                    c = g / h
                    s = -f / h
                    _rotate_columns(pacc, l - 1, i, c, s)

            z = d[k]
            if l == k:
                if z < 0.0:
                    d[k] = -z
                    qacc[:, k] = -qacc[:, k]
                break
            if sweep == _MAX_SWEEPS - 1:
                raise ArithmeticError(
                    "SVD failed to converge; input is likely not finite"
                )

            # Wilkinson-style shift from the trailing 2x2, then chase the
            # bulge down the band with paired Givens rotations.
            x = d[l]
            y = d[k - 1]
            g = sup[k - 1]
            h = sup[k]
            f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y)
            g = np.hypot(f, 1.0)
            f = ((x - z) * (x + z) + h * (y / (f + np.copysign(g, f)) - h)) / x
            c, s = 1.0, 1.0
            for j in range(l, k):
                i = j + 1
                g = sup[i]
                y = d[i]
                h = s * g
                g = c * g
                zz = np.hypot(f, h)
                sup[j] = zz
                c = f / zz
                s = h / zz
                f = x * c + g * s
                g = g * c - x * s
                h = y * s
                y = y * c
                _rotate_columns(qacc, j, i, c, s)
                zz = np.hypot(f, h)
                d[j] = zz
                if zz != 0.0:
                    zz = 1.0 / zz
                    c = f * zz
                    s = h * zz
                f = c * g + s * y
                x = c * y - s * g
                _rotate_columns(pacc, j, i, c, s)
            sup[l] = 0.0
            sup[k] = f
            d[k] = x

    order = np.argsort(-d, kind="stable")
    return d[order], pacc[:, order], qacc[:, order]


def _rotate_columns(mat: np.ndarray, j: int, i: int, c: float, s: float) -> None:
    tj = mat[:, j] * c + mat[:, i] * s
    ti = mat[:, i] * c - mat[:, j] * s
    mat[:, j] = tj
    mat[:, i] = ti


def hard_threshold(a: np.ndarray, zeta: float) -> np.ndarray:
    """Zero out every entry with |x| <= zeta; keep entries strictly above."""
    out = a.copy(order="K")
    out[np.abs(out) <= zeta] = 0.0
    return out


def gather_columns(
    flat: np.ndarray, bases: np.ndarray, stride: int, length: int
) -> np.ndarray:
    """Gather columns flat[bases[c] + i*stride] for i in range(length).

    flat is a 1-d float64 buffer; the result has shape (length, len(bases)).
    """
    flat = np.ascontiguousarray(flat, dtype=np.float64)
    bases = np.ascontiguousarray(bases, dtype=np.int64)
    if stride < 1 or length < 1:
        raise ValueError(f"stride and length must be >= 1, got {stride}, {length}")
    if bases.size:
        lo = int(bases.min())
        hi = int(bases.max()) + (length - 1) * stride
        if lo < 0 or hi >= flat.size:
            raise ValueError(
                f"gather out of range: base {lo if lo < 0 else bases.max()}, "
                f"stride {stride}, length {length}, buffer size {flat.size}"
            )
    idx = bases[np.newaxis, :] + stride * np.arange(length, dtype=np.int64)[:, np.newaxis]
    return flat[idx]
