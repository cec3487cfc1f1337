"""Multiview sparse generalized CCA toolkit."""

__version__ = "0.1.0"

from .admm import (
    IterationTrace,
    KktReport,
    SolverConfig,
    SolverState,
    fit as fit_sparse,
)
from .dataio import SyntheticConfig, generate_synthetic, split
from .fista import FistaConfig, fit_fixed_g
from .linalg import (
    SvdFactors,
    center_features,
    reduced_svd,
    soft_threshold,
    spectral_norm,
)
from .maxvar import fit_maxvar
from .metrics import MetricsReport, aroc, classify, reconstruction_error, sparsity, total_correlation
from .model import CanonicalModel
from .views import AugmentedSystem, MultiviewDataset, ViewOperator, decompose_views

__all__ = [
    "AugmentedSystem",
    "CanonicalModel",
    "FistaConfig",
    "IterationTrace",
    "KktReport",
    "MetricsReport",
    "MultiviewDataset",
    "SolverConfig",
    "SolverState",
    "SvdFactors",
    "SyntheticConfig",
    "ViewOperator",
    "aroc",
    "center_features",
    "classify",
    "decompose_views",
    "fit_fixed_g",
    "fit_maxvar",
    "fit_sparse",
    "generate_synthetic",
    "reconstruction_error",
    "reduced_svd",
    "soft_threshold",
    "sparsity",
    "spectral_norm",
    "split",
    "total_correlation",
]
