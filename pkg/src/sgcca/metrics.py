"""Evaluation metrics: correlation, reconstruction, sparsity,
nearest-centroid classification, and cross-view retrieval quality."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix
from .model import CanonicalModel
from .views import MultiviewDataset


@dataclass
class MetricsReport:
    """Bundle of evaluation quantities for one model on one dataset.

    ``accuracy`` and the retrieval fields stay ``None`` when labels or
    aligned view pairs were not supplied.
    """

    correlation: float
    reconstruction_error: float
    sparsity_per_view: list[float]
    sparsity_avg: float
    accuracy: float | None = None
    aroc_pairs: dict[tuple[int, int], float] | None = None
    aroc_avg: float | None = None


def _projections(model: CanonicalModel, dataset: MultiviewDataset) -> list[np.ndarray]:
    if model.n_views != dataset.n_views:
        raise ValueError(
            f"model has {model.n_views} views, dataset has {dataset.n_views}"
        )
    projections = []
    for j, (w, x) in enumerate(zip(model.weights, dataset.views)):
        if w.shape[0] != x.shape[0]:
            raise ValueError(
                f"view {j}: weight rows {w.shape[0]} != features {x.shape[0]}"
            )
        projections.append(w.T @ x)
    return projections


def total_correlation(model: CanonicalModel, dataset: MultiviewDataset) -> float:
    """Sum over ordered view pairs i != j of ``Trace(W_i^T X_i X_j^T W_j)``."""
    projections = _projections(model, dataset)
    total = 0.0
    for i, pi in enumerate(projections):
        for j, pj in enumerate(projections):
            if i != j:
                total += float(np.sum(pi * pj))
    return total


def reconstruction_error(model: CanonicalModel, dataset: MultiviewDataset) -> float:
    """``(1/ell) sum_j ||W_j^T X_j - G||_F^2``."""
    projections = _projections(model, dataset)
    if model.g.shape[1] != dataset.n_samples:
        raise ValueError(
            f"shared representation covers {model.g.shape[1]} samples, "
            f"dataset has {dataset.n_samples}"
        )
    total = sum(float(np.linalg.norm(p - model.g) ** 2) for p in projections)
    return total / model.ell


def sparsity(model: CanonicalModel, zero_tol: float = 1e-6) -> tuple[list[float], float]:
    """Per-view fraction of weight entries with ``|w| <= zero_tol``, plus
    the unweighted mean over views."""
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    per_view = [float(np.mean(np.abs(w) <= zero_tol)) for w in model.weights]
    return per_view, float(np.mean(per_view))


def classify(
    model: CanonicalModel,
    train: MultiviewDataset,
    test_x,
    test_labels,
) -> float:
    """Nearest-class-centroid accuracy in the latent space.

    Training samples are projected through the data view's weights and
    averaged per class; each test sample is assigned the class of the
    nearest centroid (Euclidean, ties broken by lowest class index in
    sorted label order).
    """
    if train.labels is None:
        raise ValueError("training dataset has no labels")
    test_x = as_matrix(test_x, "test matrix")
    if len(test_labels) != test_x.shape[1]:
        raise ValueError(
            f"got {len(test_labels)} test labels for {test_x.shape[1]} samples"
        )
    w = model.weights[0]
    if w.shape[0] != train.views[0].shape[0] or w.shape[0] != test_x.shape[0]:
        raise ValueError("weight rows must match data-view features")

    train_proj = w.T @ train.views[0]
    classes = sorted(set(train.labels))
    unseen = set(test_labels) - set(classes)
    if unseen:
        raise ValueError(f"test labels contain unseen classes: {sorted(unseen)}")
    train_labels = np.asarray(train.labels)
    centroids = np.column_stack(
        [train_proj[:, train_labels == c].mean(axis=1) for c in classes]
    )

    test_proj = w.T @ test_x
    diffs = test_proj[:, :, None] - centroids[:, None, :]
    dists = np.linalg.norm(diffs, axis=0)
    predicted = [classes[int(np.argmin(row))] for row in dists]
    hits = sum(1 for got, truth in zip(predicted, test_labels) if got == truth)
    return hits / len(test_labels)


def aroc(
    model: CanonicalModel, test: MultiviewDataset, pair: tuple[int, int]
) -> float:
    """Single-relevant-item retrieval quality between two aligned views.

    Column c of each view is the same document; for every query column of
    one view, all columns of the other are ranked by Euclidean distance in
    the latent space and the true pair's rank scores
    ``(N - rank) / (N - 1)``. Queries run in both directions and all
    scores are averaged.
    """
    i, j = pair
    if i == j:
        raise ValueError("retrieval pair must use two distinct views")
    projections = _projections(model, test)
    n = test.n_samples
    if n < 2:
        raise ValueError("retrieval needs at least two aligned samples")

    def direction_score(queries: np.ndarray, targets: np.ndarray) -> float:
        scores = 0.0
        for c in range(n):
            dists = np.linalg.norm(targets - queries[:, c : c + 1], axis=0)
            order = np.argsort(dists, kind="stable")
            rank = int(np.nonzero(order == c)[0][0]) + 1
            scores += (n - rank) / (n - 1)
        return scores / n

    forward = direction_score(projections[i], projections[j])
    backward = direction_score(projections[j], projections[i])
    return (forward + backward) / 2.0


def basic_report(
    model: CanonicalModel, dataset: MultiviewDataset, zero_tol: float = 1e-6
) -> MetricsReport:
    """Correlation, reconstruction error, and sparsity in one report."""
    per_view, avg = sparsity(model, zero_tol)
    return MetricsReport(
        correlation=total_correlation(model, dataset),
        reconstruction_error=reconstruction_error(model, dataset),
        sparsity_per_view=per_view,
        sparsity_avg=avg,
    )
