# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled kernel implementations.

Mirrors rtcur._backend.py_kernels; see that module for the contracts.
The SVD runs the same Householder bidiagonalization + implicit-shift QR
with explicit C loops over Fortran-ordered storage, so columns are
contiguous in the hot inner loops.
"""

import numpy as np

cimport numpy as cnp
from libc.float cimport DBL_EPSILON
from libc.math cimport copysign, fabs, hypot, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

DEF MAX_SWEEPS = 75


def dense_svd(a):
    """Economy SVD, same contract as py_kernels.dense_svd."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"dense_svd expects a 2-d array, got ndim={a.ndim}")
    m = a.shape[0]
    p = a.shape[1]
    if m == 0 or p == 0:
        raise ValueError(f"dense_svd expects a nonempty matrix, got shape {a.shape!r}")
    if m < p:
        u, s, vt = dense_svd(a.T)
        return vt.T, s, u.T

    # Reflectors are stored in place of the entries they annihilate.
    work = np.array(a, dtype=np.float64, order="F", copy=True)
    d = np.zeros(p)
    sup = np.zeros(p)
    leftflag = np.zeros(p, dtype=np.uint8)
    rightflag = np.zeros(p, dtype=np.uint8)
    scratch = np.empty(m)
    _bidiagonalize(work, d, sup, leftflag, rightflag, scratch)

    ubig = np.zeros((m, p), order="F")
    vbig = np.zeros((p, p), order="F")
    _accumulate(work, leftflag, rightflag, ubig, vbig)

    pacc = np.eye(p, order="F")
    qacc = np.eye(p, order="F")
    if _qr_diagonalize(d, sup, pacc, qacc) != 0:
        raise ArithmeticError("SVD failed to converge; input is likely not finite")

    order = np.argsort(-d, kind="stable")
    u = ubig @ pacc[:, order]
    v = vbig @ qacc[:, order]
    return u, d[order], v.T


cdef void _bidiagonalize(double[::1, :] W, double[::1] d, double[::1] sup,
                         cnp.uint8_t[::1] lf, cnp.uint8_t[::1] rf,
                         double[::1] t) noexcept:
    cdef Py_ssize_t m = W.shape[0], p = W.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, nx, beta, dot, wj
    for k in range(p):
        s = 0.0
        for i in range(k, m):
            s += W[i, k] * W[i, k]
        if s > 0.0:
            nx = sqrt(s)
            beta = -copysign(nx, W[k, k])
            W[k, k] -= beta
            s = 0.0
            for i in range(k, m):
                s += W[i, k] * W[i, k]
            nx = sqrt(s)
            for i in range(k, m):
                W[i, k] /= nx
            for j in range(k + 1, p):
                dot = 0.0
                for i in range(k, m):
                    dot += W[i, k] * W[i, j]
                dot *= 2.0
                for i in range(k, m):
                    W[i, j] -= dot * W[i, k]
            d[k] = beta
            lf[k] = 1
        if k < p - 2:
            s = 0.0
            for j in range(k + 1, p):
                s += W[k, j] * W[k, j]
            if s > 0.0:
                nx = sqrt(s)
                beta = -copysign(nx, W[k, k + 1])
                W[k, k + 1] -= beta
                s = 0.0
                for j in range(k + 1, p):
                    s += W[k, j] * W[k, j]
                nx = sqrt(s)
                for j in range(k + 1, p):
                    W[k, j] /= nx
                # Apply I - 2 w w^T from the right to rows k+1..m-1,
                # sweeping columns so every inner loop is contiguous.
                for i in range(k + 1, m):
                    t[i] = 0.0
                for j in range(k + 1, p):
                    wj = W[k, j]
                    if wj != 0.0:
                        for i in range(k + 1, m):
                            t[i] += W[i, j] * wj
                for j in range(k + 1, p):
                    wj = 2.0 * W[k, j]
                    if wj != 0.0:
                        for i in range(k + 1, m):
                            W[i, j] -= t[i] * wj
                sup[k + 1] = beta
                rf[k] = 1
        elif k == p - 2:
            sup[k + 1] = W[k, k + 1]


cdef void _accumulate(double[::1, :] W, cnp.uint8_t[::1] lf, cnp.uint8_t[::1] rf,
                      double[::1, :] U, double[::1, :] V) noexcept:
    cdef Py_ssize_t m = W.shape[0], p = W.shape[1]
    cdef Py_ssize_t i, j, k, l
    cdef double dot
    for i in range(p):
        U[i, i] = 1.0
    for k in range(p - 1, -1, -1):
        if lf[k]:
            for j in range(k, p):
                dot = 0.0
                for i in range(k, m):
                    dot += W[i, k] * U[i, j]
                dot *= 2.0
                for i in range(k, m):
                    U[i, j] -= dot * W[i, k]
    for i in range(p):
        V[i, i] = 1.0
    for k in range(p - 3, -1, -1):
        if rf[k]:
            for j in range(k + 1, p):
                dot = 0.0
                for l in range(k + 1, p):
                    dot += W[k, l] * V[l, j]
                dot *= 2.0
                for l in range(k + 1, p):
                    V[l, j] -= dot * W[k, l]


cdef inline void _rot(double[::1, :] M, Py_ssize_t j, Py_ssize_t i,
                      double c, double s) noexcept:
    cdef Py_ssize_t r, n = M.shape[0]
    cdef double tj, ti
    for r in range(n):
        tj = M[r, j] * c + M[r, i] * s
        ti = M[r, i] * c - M[r, j] * s
        M[r, j] = tj
        M[r, i] = ti


cdef int _qr_diagonalize(double[::1] d, double[::1] sup,
                         double[::1, :] P, double[::1, :] Q) noexcept:
    cdef Py_ssize_t p = d.shape[0]
    cdef Py_ssize_t i, j, k, l, sweep
    cdef bint cancel
    cdef double anorm = 0.0, tol, c, s, f, g, h, x, y, z, zz
    for i in range(p):
        if fabs(d[i]) + fabs(sup[i]) > anorm:
            anorm = fabs(d[i]) + fabs(sup[i])
    tol = DBL_EPSILON * anorm

    for k in range(p - 1, -1, -1):
        for sweep in range(MAX_SWEEPS):
            # sup[0] == 0 guarantees the scan terminates before d[-1].
            cancel = True
            l = k
            while True:
                if fabs(sup[l]) <= tol:
                    cancel = False
                    break
                if fabs(d[l - 1]) <= tol:
                    break
                l -= 1

            if cancel:
                c = 0.0
                s = 1.0
                for i in range(l, k + 1):
                    f = s * sup[i]
                    sup[i] = c * sup[i]
                    if fabs(f) <= tol:
                        break
                    g = d[i]
                    h = hypot(f, g)
                    d[i] = h
                    c = g / h
                    s = -f / h
                    _rot(P, l - 1, i, c, s)

            z = d[k]
            if l == k:
                if z < 0.0:
                    d[k] = -z
                    for i in range(p):
                        Q[i, k] = -Q[i, k]
                break
            if sweep == MAX_SWEEPS - 1:
                return -1

            x = d[l]
            y = d[k - 1]
            g = sup[k - 1]
            h = sup[k]
            f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y)
            g = hypot(f, 1.0)
            f = ((x - z) * (x + z) + h * (y / (f + copysign(g, f)) - h)) / x
            c = 1.0
            s = 1.0
            for j in range(l, k):
                i = j + 1
                g = sup[i]
                y = d[i]
                h = s * g
                g = c * g
                zz = hypot(f, h)
                sup[j] = zz
                c = f / zz
                s = h / zz
                f = x * c + g * s
                g = g * c - x * s
                h = y * s
                y = y * c
                _rot(Q, j, i, c, s)
                zz = hypot(f, h)
                d[j] = zz
                if zz != 0.0:
                    zz = 1.0 / zz
                    c = f * zz
                    s = h * zz
                f = c * g + s * y
                x = c * y - s * g
                _rot(P, j, i, c, s)
            sup[l] = 0.0
            sup[k] = f
            d[k] = x
    return 0


def hard_threshold(a, double zeta):
    """Zero out every entry with |x| <= zeta; keep entries strictly above."""
    out = np.array(a, dtype=np.float64, copy=True, order="K")
    if not (out.flags["C_CONTIGUOUS"] or out.flags["F_CONTIGUOUS"]):
        out = np.ascontiguousarray(out)
    cdef double[::1] flat = out.ravel(order="K")
    cdef Py_ssize_t i, n = flat.shape[0]
    for i in range(n):
        if fabs(flat[i]) <= zeta:
            flat[i] = 0.0
    return out


def gather_columns(flat, bases, stride, length):
    """Gather columns flat[bases[c] + i*stride], same contract as py_kernels."""
    cdef const double[::1] fl = np.ascontiguousarray(flat, dtype=np.float64)
    cdef const cnp.int64_t[::1] bs = np.ascontiguousarray(bases, dtype=np.int64)
    cdef Py_ssize_t st = stride, ln = length
    cdef Py_ssize_t ncols = bs.shape[0]
    cdef Py_ssize_t n = fl.shape[0]
    cdef Py_ssize_t c, i, base
    if st < 1 or ln < 1:
        raise ValueError(f"stride and length must be >= 1, got {stride}, {length}")
    for c in range(ncols):
        base = bs[c]
        if base < 0 or base + (ln - 1) * st >= n:
            raise ValueError(
                f"gather out of range: base {base}, stride {stride}, "
                f"length {length}, buffer size {n}"
            )
    out = np.empty((ln, ncols), order="F")
    cdef double[::1, :] O = out
    for c in range(ncols):
        base = bs[c]
        for i in range(ln):
            O[i, c] = fl[base + i * st]
    return out
