"""Fitted model container shared by all three solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ALGORITHMS = ("maxvar", "sgcca-admm", "sgcca-fista")


@dataclass
class CanonicalModel:
    """Per-view weights plus the shared latent representation.

    ``weights[j]`` maps view j's features to the latent space (n_j x ell);
    ``g`` is the ell x m shared representation with orthonormal rows.
    ``info`` carries solver metadata (iteration counts, convergence status)
    preserved by model persistence.
    """

    weights: list[np.ndarray]
    g: np.ndarray
    ell: int
    algorithm: str
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm tag {self.algorithm!r}")
        if self.g.shape[0] != self.ell:
            raise ValueError("shared representation must have ell rows")
        for j, w in enumerate(self.weights):
            if w.ndim != 2 or w.shape[1] != self.ell:
                raise ValueError(f"weight block {j} must have ell columns")

    @property
    def n_views(self) -> int:
        return len(self.weights)
