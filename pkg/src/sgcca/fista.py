"""Fixed-G sparse variant: per-view, per-column l1 minimization.

With the shared representation frozen at the MAX-VAR solution, each weight
column solves an independent l1-penalized least-squares problem against
its view's constraint, handled by an accelerated proximal gradient scheme
with the classic momentum sequence ``t_{s+1} = (1 + sqrt(1 + 4 t_s^2)) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_RANK_TOL, soft_threshold, spectral_norm
from .maxvar import build_m_matrix, top_eigenvectors
from .model import CanonicalModel
from .parallel import map_in_order
from .views import MultiviewDataset, ViewOperator, decompose_views


@dataclass(frozen=True)
class FistaConfig:
    """Inner-solver settings.

    ``l1_weight`` scales the sparsity penalty relative to the squared
    constraint residual. With ``relative_weight`` set, the effective
    weight per column is ``l1_weight`` times the smallest penalty that
    yields an all-zero solution, which adapts the trade-off to the data
    scale; the absolute default of 1 keeps the penalty fixed.
    """

    max_iter: int = 500
    tol: float = 1e-6
    l1_weight: float = 1.0
    relative_weight: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.l1_weight < 0:
            raise ValueError("l1_weight must be nonnegative")


def fista_column(
    op: ViewOperator, z, config: FistaConfig | None = None
) -> np.ndarray:
    """Sparse weights for one latent direction of one view.

    Minimizes ``weight * ||alpha||_1 + ||P^T alpha - b||^2`` with
    ``b = Sigma^-1 Q^T z``, starting from zero. The gradient of the
    quadratic has Lipschitz constant ``2 ||P P^T||``; the step size and
    shrinkage threshold use that constant, with ``||P P^T||`` computed and
    checked against its theoretical value of 1 (orthonormal-column
    projector).

    Parameters
    ----------
    op : ViewOperator
        Decomposed view supplying P, Sigma, Q.
    z : array_like, shape (m,) or (m, 1)
        Unit-norm latent direction (a column of Z = G^T).
    config : FistaConfig, optional

    Returns
    -------
    ndarray, shape (n_j,)
    """
    config = config or FistaConfig()
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != op.svd.q.shape[0]:
        raise ValueError("latent direction length does not match sample count")
    znorm = float(np.linalg.norm(z))
    if abs(znorm - 1.0) > 1e-6:
        raise ValueError(f"latent direction must have unit norm, got {znorm}")

    p = op.svd.p
    big_l = spectral_norm(p.T @ p)
    if abs(big_l - 1.0) > 1e-8:
        raise ArithmeticError(
            f"projector norm deviates from 1 by {abs(big_l - 1.0):.2e}"
        )
    lip = 2.0 * big_l

    b = (op.svd.q.T @ z) / op.svd.sigma
    pb = p @ b
    weight = config.l1_weight
    if config.relative_weight:
        weight *= 2.0 * float(np.abs(pb).max())

    alpha_prev = np.zeros(p.shape[0])
    v = alpha_prev
    t = 1.0
    for _ in range(config.max_iter):
        grad = 2.0 * (p @ (p.T @ v) - pb)
        alpha = soft_threshold(v - grad / lip, weight / lip)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        v = alpha + ((t - 1.0) / t_next) * (alpha - alpha_prev)
        done = float(np.linalg.norm(alpha - alpha_prev)) <= config.tol
        alpha_prev = alpha
        t = t_next
        if done:
            break
    return alpha_prev


def fit_fixed_g(
    dataset: MultiviewDataset,
    config: FistaConfig | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    threads: int | None = None,
) -> CanonicalModel:
    """Fit sparse weights against the MAX-VAR shared representation.

    The J * ell column problems are independent and may run concurrently;
    assembly order is fixed, so results do not depend on scheduling.
    """
    config = config or FistaConfig()
    operators = decompose_views(dataset, rank_tol)
    g = top_eigenvectors(build_m_matrix(operators), dataset.ell)

    jobs = [(j, i) for j in range(len(operators)) for i in range(dataset.ell)]

    def solve_one(job: tuple[int, int]) -> np.ndarray:
        j, i = job
        return fista_column(operators[j], g[i], config)

    columns = map_in_order(solve_one, jobs, threads)
    weights = []
    for j, op in enumerate(operators):
        block = columns[j * dataset.ell : (j + 1) * dataset.ell]
        weights.append(np.column_stack(block))
    return CanonicalModel(
        weights=weights,
        g=g,
        ell=dataset.ell,
        algorithm="sgcca-fista",
        info={
            "l1_weight": config.l1_weight,
            "relative_weight": config.relative_weight,
            "max_iter": config.max_iter,
        },
    )
