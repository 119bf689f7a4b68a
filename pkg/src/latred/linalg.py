"""Dense real matrix kernels shared by the reduction and estimation code."""

import math

import numpy as np

__all__ = [
    "RankDeficientError",
    "qr_factorize",
    "apply_givens_rows",
    "residual_norm",
    "round_half_away",
    "int_det",
]

RANK_TOL = 1e-12


class RankDeficientError(ValueError):
    """Raised when a model matrix does not have full column rank."""


def round_half_away(x):
    """Round to the nearest integer, ties away from zero (1.5 -> 2, -1.5 -> -2)."""
    if np.ndim(x) == 0:
        x = float(x)
        return math.copysign(math.floor(abs(x) + 0.5), x)
    x = np.asarray(x, dtype=float)
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def qr_factorize(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR factorization ``A = Q1 @ R`` with a positive diagonal on R.

    Args:
      A: m x n real matrix with m >= n and full column rank.

    Returns:
      (Q1, R) where Q1 is m x n with orthonormal columns and R is n x n
      upper triangular with r_ii > 0.

    Raises:
      RankDeficientError: if some |r_ii| falls below 1e-12 * ||A||_F.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    m, n = A.shape
    if m < n or n < 1:
        raise ValueError(f"need rows >= cols >= 1, got {m}x{n}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")

    # LAPACK geqrf (Householder) under the hood
    Q1, R = np.linalg.qr(A, mode="reduced")
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q1 = Q1 * signs
    R = signs[:, None] * R
    R = np.triu(R)

    scale = np.linalg.norm(A)
    if np.min(np.abs(np.diag(R))) <= RANK_TOL * scale:
        raise RankDeficientError(
            f"matrix is numerically rank deficient (min |r_ii| = {np.min(np.diag(R)):.3e})"
        )
    return Q1, R


def apply_givens_rows(R: np.ndarray, Q: np.ndarray, k: int) -> None:
    """Zero the bulge R[k, k-1] with a Givens rotation on rows k-1, k.

    The rotation G is applied to R[k-1:k+1, k-1:] and its transpose is
    accumulated into columns k-1, k of Q, so ``Q @ R`` is unchanged.
    Indices are 0-based, 1 <= k <= n-1. Both arrays are modified in place.
    """
    a = R[k - 1, k - 1]
    b = R[k, k - 1]
    rho = np.hypot(a, b)
    if rho == 0.0:
        return
    c, s = a / rho, b / rho
    G = np.array([[c, s], [-s, c]])

    R[k - 1 : k + 1, k - 1 :] = G @ R[k - 1 : k + 1, k - 1 :]
    R[k - 1, k - 1] = rho
    R[k, k - 1] = 0.0
    Q[:, k - 1 : k + 1] = Q[:, k - 1 : k + 1] @ G.T


def residual_norm(A, Q, R, Z) -> float:
    """Return ||A Z - Q R||_F."""
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)
    Z = np.asarray(Z)
    m, n = A.shape
    if Z.shape != (n, n) or R.shape != (n, n) or Q.shape != (m, n):
        raise ValueError(
            f"dimension mismatch: A {A.shape}, Q {Q.shape}, R {R.shape}, Z {Z.shape}"
        )
    return float(np.linalg.norm(A @ Z - Q @ R))


def int_det(M) -> int:
    """Exact determinant of an integer matrix (Bareiss fraction-free elimination)."""
    a = [[int(v) for v in row] for row in np.asarray(M).tolist()]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
