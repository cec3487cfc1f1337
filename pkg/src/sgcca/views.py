"""Per-view constraint operators and the zero-padded consensus system.

Each view matrix ``X_j`` (n_j features x m shared samples) is reduced to a
pair ``(A_j, B_j)`` through its SVD so that the weight/latent coupling
becomes the linear constraint ``A_j W_j + B_j Z = 0``. Views of unequal
rank are reconciled by padding with zero rows before consensus averaging.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_RANK_TOL, SvdFactors, as_matrix, reduced_svd


@dataclass
class MultiviewDataset:
    """J feature-by-sample matrices sharing the sample axis.

    Parameters
    ----------
    views : list of ndarray
        View matrices, view j shaped (n_j, m). All must share m.
    ell : int
        Target latent dimension (validated against view ranks at
        decomposition time, since ranks are unknown before the SVD).
    labels : list, optional
        One class identifier per sample, for classification experiments.
    """

    views: list[np.ndarray]
    ell: int = 1
    labels: list | None = None

    def __post_init__(self):
        if len(self.views) < 2:
            raise ValueError("a multiview dataset needs at least two views")
        self.views = [as_matrix(v, f"view {j}") for j, v in enumerate(self.views)]
        m = self.views[0].shape[1]
        for j, v in enumerate(self.views):
            if v.shape[1] != m:
                raise ValueError(
                    f"view {j} has {v.shape[1]} samples, expected {m}"
                )
        if self.ell < 1:
            raise ValueError("target dimension must be at least 1")
        if self.labels is not None and len(self.labels) != m:
            raise ValueError(
                f"got {len(self.labels)} labels for {m} samples"
            )

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_samples(self) -> int:
        return self.views[0].shape[1]


@dataclass(frozen=True)
class ViewOperator:
    """Constraint pair for one view: ``a = P^T`` and ``b = -Sigma^-1 Q^T``.

    ``a`` has orthonormal rows by construction, so it is always of full
    row rank r_j.
    """

    a: np.ndarray
    b: np.ndarray
    svd: SvdFactors

    @property
    def rank(self) -> int:
        return self.svd.rank

    @property
    def n_features(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True)
class AugmentedSystem:
    """View operators plus the zero-padded quantities used for consensus.

    ``tilde_b[j]`` equals ``operators[j].b`` in its first r_j rows and is
    zero below; ``bar_b`` is their plain average. Padding rows are
    identically satisfied, so the constraint set is unchanged.
    """

    operators: list[ViewOperator] = field(repr=False)
    r: int
    tilde_b: list[np.ndarray] = field(repr=False)
    bar_b: np.ndarray = field(repr=False)

    @property
    def n_views(self) -> int:
        return len(self.operators)

    @property
    def n_samples(self) -> int:
        return self.bar_b.shape[1]


def decompose_views(
    dataset: MultiviewDataset, rank_tol: float = DEFAULT_RANK_TOL
) -> list[ViewOperator]:
    """Build the per-view operators from reduced SVDs.

    Requires every view to be nonzero and ``dataset.ell`` to be at most
    the smallest view rank. Views are expected to be centered already;
    the CLI pipeline centers by default.
    """
    operators = []
    for j, x in enumerate(dataset.views):
        try:
            factors = reduced_svd(x, rank_tol)
        except ValueError as exc:
            raise ValueError(f"view {j}: {exc}") from exc
        a = factors.p.T.copy()
        b = -(factors.q / factors.sigma).T
        operators.append(ViewOperator(a=a, b=b, svd=factors))
    min_rank = min(op.rank for op in operators)
    if dataset.ell > min_rank:
        raise ValueError(
            f"target dimension exceeds view rank ({dataset.ell} > {min_rank})"
        )
    return operators


def augment(operators: list[ViewOperator]) -> AugmentedSystem:
    """Pad every ``b`` to ``r = max_j r_j`` rows and average them."""
    if not operators:
        raise ValueError("no view operators to augment")
    r = max(op.rank for op in operators)
    m = operators[0].b.shape[1]
    tilde_b = []
    for op in operators:
        t = np.zeros((r, m))
        t[: op.rank] = op.b
        tilde_b.append(t)
    bar_b = sum(tilde_b) / len(operators)
    return AugmentedSystem(operators=list(operators), r=r, tilde_b=tilde_b, bar_b=bar_b)


def bar_averages(
    system: AugmentedSystem, w: list[np.ndarray], lam: list[np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Consensus averages ``(1/J) sum_j pad(A_j W_j)`` and ``(1/J) sum_j pad(Lambda_j)``.

    Summation runs in fixed view order so results are reproducible under
    concurrent per-view computation.
    """
    if len(w) != system.n_views or len(lam) != system.n_views:
        raise ValueError("need one W and one Lambda block per view")
    ell = w[0].shape[1]
    bar_w = np.zeros((system.r, ell))
    bar_lam = np.zeros((system.r, ell))
    for op, wj, lj in zip(system.operators, w, lam):
        if wj.shape != (op.n_features, ell):
            raise ValueError(
                f"W block shaped {wj.shape}, expected {(op.n_features, ell)}"
            )
        if lj.shape != (op.rank, ell):
            raise ValueError(
                f"Lambda block shaped {lj.shape}, expected {(op.rank, ell)}"
            )
        bar_w[: op.rank] += op.a @ wj
        bar_lam[: op.rank] += lj
    j = system.n_views
    return bar_w / j, bar_lam / j
