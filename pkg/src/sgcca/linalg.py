"""Dense matrix primitives shared by all solver components.

Matrices are plain 2-D float64 ``numpy`` arrays. Every public operation
validates its input and guarantees finite entries in its output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-10


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a 2-D float64 array and validate it.

    Raises
    ------
    ValueError
        If the array is not 2-D, is empty, or contains NaN/Inf entries.
    """
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class SvdFactors:
    """Rank-truncated SVD ``x = p @ diag(sigma) @ q.T``.

    ``p`` (n x r) and ``q`` (m x r) have orthonormal columns; ``sigma``
    holds the r retained singular values in descending order, all positive.
    Column signs follow a fixed convention (the entry of largest absolute
    value in each column of ``p`` is nonnegative) so factors are
    deterministic per input.
    """

    p: np.ndarray
    sigma: np.ndarray
    q: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.sigma.size)

    def reconstruct(self) -> np.ndarray:
        return (self.p * self.sigma) @ self.q.T


def _fix_signs(p: np.ndarray, qt: np.ndarray) -> None:
    """Flip paired column/row signs so each column of ``p`` has a
    nonnegative entry of largest absolute value. In-place."""
    for i in range(p.shape[1]):
        k = int(np.argmax(np.abs(p[:, i])))
        if p[k, i] < 0:
            p[:, i] *= -1.0
            qt[i, :] *= -1.0


def reduced_svd(x, rank_tol: float = DEFAULT_RANK_TOL) -> SvdFactors:
    """Reduced SVD keeping singular values above ``rank_tol * sigma_max``.

    Parameters
    ----------
    x : array_like, shape (n, m)
        Input matrix; must not be identically zero.
    rank_tol : float
        Relative truncation threshold for the numerical rank.

    Returns
    -------
    SvdFactors
        Factors with deterministic column signs.
    """
    x = as_matrix(x)
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s[0] == 0.0:
        raise ValueError("zero matrix has no reduced SVD")
    r = int(np.sum(s > rank_tol * s[0]))
    p = u[:, :r].copy()
    qt = vt[:r, :].copy()
    _fix_signs(p, qt)
    return SvdFactors(p=p, sigma=s[:r].copy(), q=qt.T.copy())


def soft_threshold(x, mu: float) -> np.ndarray:
    """Componentwise shrinkage ``sign(x) * max(|x| - mu, 0)``.

    This is the proximal operator of ``mu * ||.||_1``; ``mu`` must be
    nonnegative and ``mu = 0`` is the identity.
    """
    if mu < 0:
        raise ValueError("shrinkage threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - mu, 0.0)


def spectral_norm(x, tol: float = 1e-10) -> float:
    """Largest singular value of ``x``.

    Computed through a full LAPACK SVD, which is accurate to machine
    precision and therefore well within any requested relative ``tol``.
    """
    x = as_matrix(x)
    if tol <= 0:
        raise ValueError("tol must be positive")
    return float(np.linalg.svd(x, compute_uv=False)[0])


def center_features(x) -> np.ndarray:
    """Shift each feature row of ``x`` to zero mean (samples are columns)."""
    x = as_matrix(x)
    return x - x.mean(axis=1, keepdims=True)
