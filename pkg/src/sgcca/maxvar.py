"""MAX-VAR GCCA baseline.

The shared representation comes from the top eigenvectors of the
aggregated projector matrix ``M = sum_j Q_j Q_j^T``; this equals the
textbook aggregation ``sum_j X_j^T (X_j X_j^T)^{-1} X_j`` under each
view's reduced SVD while avoiding explicit inverses. Per-view weights are
the minimum-norm least-squares solutions for the chosen representation.
"""

from __future__ import annotations

import numpy as np

from .linalg import DEFAULT_RANK_TOL, as_matrix
from .model import CanonicalModel
from .views import MultiviewDataset, ViewOperator, decompose_views


def build_m_matrix(operators: list[ViewOperator]) -> np.ndarray:
    """Aggregate the per-view orthogonal projectors onto sample space."""
    m = operators[0].b.shape[1]
    agg = np.zeros((m, m))
    for op in operators:
        agg += op.svd.q @ op.svd.q.T
    return agg


def top_eigenvectors(m_matrix, ell: int) -> np.ndarray:
    """Rows of the returned (ell x m) matrix are unit eigenvectors for the
    ell largest eigenvalues of the symmetrized input.

    Ordering is by descending eigenvalue with ties broken by ascending
    index in the underlying symmetric eigendecomposition; each row's sign
    is fixed so its entry of largest absolute value is nonnegative.
    """
    m_matrix = as_matrix(m_matrix)
    m = m_matrix.shape[0]
    if m_matrix.shape[1] != m:
        raise ValueError("eigenvector extraction needs a square matrix")
    if ell > m:
        raise ValueError(f"cannot extract {ell} eigenvectors from a {m}x{m} matrix")
    sym = (m_matrix + m_matrix.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    order = np.argsort(-eigvals, kind="stable")
    g = eigvecs[:, order[:ell]].T.copy()
    for i in range(ell):
        k = int(np.argmax(np.abs(g[i])))
        if g[i, k] < 0:
            g[i] *= -1.0
    return g


def fit_maxvar(
    dataset: MultiviewDataset, rank_tol: float = DEFAULT_RANK_TOL
) -> CanonicalModel:
    """Fit the MAX-VAR baseline: eigenvector G plus minimum-norm weights."""
    operators = decompose_views(dataset, rank_tol)
    g = top_eigenvectors(build_m_matrix(operators), dataset.ell)
    weights = [weights_for_g(op, g) for op in operators]
    return CanonicalModel(
        weights=weights, g=g, ell=dataset.ell, algorithm="maxvar"
    )


def weights_for_g(op: ViewOperator, g: np.ndarray) -> np.ndarray:
    """Minimum-norm solution of the per-view least squares for a fixed G:
    ``W_j = P_j Sigma_j^-1 Q_j^T G^T``."""
    return op.svd.p @ ((op.svd.q.T @ g.T) / op.svd.sigma[:, None])
