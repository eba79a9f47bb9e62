"""Closed-form determinants and adjugates for stacks of 2x2 and 3x3 matrices.

All functions accept a single matrix ``(n, n)`` or a stack ``(N, n, n)``.
"""

import numpy as np

#: relative threshold below which a determinant is treated as zero
DET_RTOL = 1e-12


def det(M):
    M = np.asarray(M, dtype=float)
    n = M.shape[-1]
    if n == 2:
        return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    if n == 3:
        return (M[..., 0, 0] * (M[..., 1, 1] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 1])
                - M[..., 0, 1] * (M[..., 1, 0] * M[..., 2, 2] - M[..., 1, 2] * M[..., 2, 0])
                + M[..., 0, 2] * (M[..., 1, 0] * M[..., 2, 1] - M[..., 1, 1] * M[..., 2, 0]))
    raise ValueError(f"closed-form determinant supports n in {{2, 3}}, got {n}")


def adjugate(M):
    """Transpose of the cofactor matrix, so that ``M @ adjugate(M) = det(M) I``."""
    M = np.asarray(M, dtype=float)
    n = M.shape[-1]
    out = np.empty_like(M)
    if n == 2:
        out[..., 0, 0] = M[..., 1, 1]
        out[..., 0, 1] = -M[..., 0, 1]
        out[..., 1, 0] = -M[..., 1, 0]
        out[..., 1, 1] = M[..., 0, 0]
        return out
    if n == 3:
        # rows of the adjugate are cross products of the columns
        c0, c1, c2 = M[..., :, 0], M[..., :, 1], M[..., :, 2]
        out[..., 0, :] = np.cross(c1, c2)
        out[..., 1, :] = np.cross(c2, c0)
        out[..., 2, :] = np.cross(c0, c1)
        return out
    raise ValueError(f"closed-form adjugate supports n in {{2, 3}}, got {n}")


def hadamard_scale(M):
    """Product of row norms: an upper bound on ``|det M|`` with the same units."""
    return np.prod(np.linalg.norm(np.asarray(M, dtype=float), axis=-1), axis=-1)


def is_singular(M, rtol=DET_RTOL):
    """True where ``|det M| <= rtol * prod(row norms)``."""
    return np.abs(det(M)) <= rtol * hadamard_scale(M)


def solve_adjugate(A, B, rtol=DET_RTOL):
    """Return ``(A^-1 B, singular_mask)``; rows of singular stacks are NaN."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    d = det(A)
    singular = np.abs(d) <= rtol * hadamard_scale(A)
    safe = np.where(singular, 1.0, d)
    X = adjugate(A) @ B / np.asarray(safe)[..., None, None]
    X = np.where(np.asarray(singular)[..., None, None], np.nan, X)
    return X, singular
