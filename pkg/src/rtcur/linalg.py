"""Minimal dense matrix numerics: truncated SVD and truncated pseudoinverse.

Decompositions are computed by the in-package kernels (Householder
bidiagonalization + implicit-shift QR); nothing here calls into an
external factorization routine.  The matrices this package decomposes
are small intersection blocks, O(r log d) square, plus the unfoldings
used by the dense reference solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import dense_svd

__all__ = ["TruncatedSvd", "truncated_svd", "pinv_truncated"]

# Singular values below max(m, p) * sigma_1 * PINV_RTOL are treated as
# zero when inverting, so rank-deficient blocks degrade to a best-effort
# projection instead of dividing by noise.
PINV_RTOL = 1e-12


@dataclass(frozen=True)
class TruncatedSvd:
    """Rank-r factorization M_r = u @ diag(singular_values) @ v.T.

    u is m x r and v is p x r, both with orthonormal columns;
    singular_values is non-increasing and nonnegative.
    """

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.singular_values.size)

    def reconstruct(self) -> np.ndarray:
        """The truncated matrix M_r itself."""
        return (self.u * self.singular_values) @ self.v.T

    def pinv(self) -> np.ndarray:
        """Moore-Penrose pseudoinverse of M_r, computed from the factors.

        Returns v @ diag(1/sigma) @ u.T with reciprocals taken only for
        singular values above the cutoff tau = max(m, p) * sigma_1 * 1e-12;
        an all-zero spectrum gives the zero matrix.
        """
        s = self.singular_values
        tau = max(self.u.shape[0], self.v.shape[0]) * float(s[0]) * PINV_RTOL
        inv = np.divide(1.0, s, out=np.zeros_like(s), where=s > tau)
        return (self.v * inv) @ self.u.T


def truncated_svd(m: np.ndarray, r: int) -> TruncatedSvd:
    """Best rank-r factorization of a real matrix.

    Requires 1 <= r <= min(m, p) and finite entries.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"truncated_svd needs a nonempty matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("truncated_svd input contains non-finite entries")
    r = int(r)
    q = min(m.shape)
    if not 1 <= r <= q:
        raise ValueError(f"rank {r} outside [1, {q}] for shape {m.shape}")
    u, s, vt = dense_svd(m)
    return TruncatedSvd(u=u[:, :r], singular_values=s[:r], v=vt[:r].T)


def pinv_truncated(m: np.ndarray, r: int) -> np.ndarray:
    """Pseudoinverse of the best rank-r approximation of m."""
    return truncated_svd(m, r).pinv()
