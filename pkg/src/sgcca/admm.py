"""Distributed alternating-iteration sparse GCCA solver.

One outer iteration performs, in order: the consensus Procrustes step for
the shared representation Z, a linearized soft-threshold step per view for
the weights, the multiplier update per view, and the capped geometric
growth of the penalty parameter. The Z step is a synchronization barrier;
the per-view (W, Lambda) pairs are mutually independent and may run
concurrently, with all cross-view reductions summed in fixed view order so
results are identical either way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_RANK_TOL, as_matrix, soft_threshold
from .model import CanonicalModel
from .parallel import map_in_order
from .views import (
    AugmentedSystem,
    MultiviewDataset,
    augment,
    bar_averages,
    decompose_views,
)


@dataclass(frozen=True)
class SolverConfig:
    """Tuning parameters for the alternating iteration.

    ``delta`` is the proximity parameter of the linearized weight step,
    ``rho`` the growth factor of the penalty, capped at ``beta_max``.
    ``eps1`` bounds the scaled multiplier change (equal to the primal
    residual) and ``eps2`` the scaled weight change; the solver stops when
    either falls below its tolerance, or only on the first when
    ``strict_feasibility`` is set. ``zero_tol`` is the magnitude below
    which weight entries count as zero in sparsity reports.
    """

    delta: float = 1.0
    rho: float = 1.1
    beta_max: float = 1e4
    eps1: float = 1e-5
    eps2: float = 1e-5
    max_iter: int = 1000
    zero_tol: float = 1e-6
    strict_feasibility: bool = False

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.rho <= 1:
            raise ValueError("rho must exceed 1")
        if self.beta_max <= 0:
            raise ValueError("beta_max must be positive")
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.zero_tol < 0:
            raise ValueError("zero_tol must be nonnegative")


@dataclass
class SolverState:
    """One iterate: per-view weights and multipliers, shared Z, penalty."""

    w: list[np.ndarray]
    z: np.ndarray
    lam: list[np.ndarray]
    beta: float
    k: int = 0


@dataclass(frozen=True)
class TraceRecord:
    k: int
    beta: float
    primal_residuals: tuple[float, ...]
    objective_l1: float
    orthogonality_error: float
    w_changes: tuple[float, ...]


@dataclass
class IterationTrace:
    """Per-iteration stopping statistics, one record per completed iteration."""

    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def column_names(self) -> list[str]:
        j = len(self.records[0].primal_residuals) if self.records else 0
        return (
            ["k", "beta"]
            + [f"primal_residual_{i + 1}" for i in range(j)]
            + ["objective_l1", "orthogonality_error"]
            + [f"w_change_{i + 1}" for i in range(j)]
        )

    def rows(self):
        for rec in self.records:
            yield (
                [rec.k, rec.beta]
                + list(rec.primal_residuals)
                + [rec.objective_l1, rec.orthogonality_error]
                + list(rec.w_changes)
            )


@dataclass(frozen=True)
class KktReport:
    """First-order optimality residuals at a solver state.

    ``stationarity`` holds, per view, the Frobenius aggregate of the
    entrywise distance of ``A_j^T Lambda_j`` from the subdifferential of
    the entrywise l1 norm at ``W_j``. ``implied_multiplier`` is the
    orthogonality-constraint multiplier reconstructed from the per-view
    ones.
    """

    stationarity: tuple[float, ...]
    feasibility: tuple[float, ...]
    orthogonality: float
    implied_multiplier: np.ndarray


def init_state(system: AugmentedSystem, ell: int, config: SolverConfig) -> SolverState:
    """Cold start: zero weights and multipliers, data-scaled initial penalty.

    ``beta_0 = max_j 1 / max_abs_entry(A_j^T B_j)``. Z is set to the first
    ell columns of the identity; with the cold start it is consumed only
    through the first Procrustes step, which reproduces this same value.
    """
    beta0 = 0.0
    for j, op in enumerate(system.operators):
        scale = float(np.abs(op.a.T @ op.b).max())
        if scale == 0.0:
            raise ValueError(f"view {j} yields a zero coupling matrix")
        beta0 = max(beta0, 1.0 / scale)
    w = [np.zeros((op.n_features, ell)) for op in system.operators]
    lam = [np.zeros((op.rank, ell)) for op in system.operators]
    z = np.eye(system.n_samples, ell)
    return SolverState(w=w, z=z, lam=lam, beta=beta0, k=0)


def _complete_orthonormal(basis: np.ndarray, target: int) -> np.ndarray:
    """Extend orthonormal columns to ``target`` columns by Gram-Schmidt
    over identity vectors, in index order (deterministic)."""
    d = basis.shape[0]
    cols = [basis[:, i] for i in range(basis.shape[1])]
    i = 0
    while len(cols) < target:
        if i >= d:
            raise ValueError("cannot complete basis: not enough dimensions")
        v = np.zeros(d)
        v[i] = 1.0
        for _ in range(2):  # twice for numerical orthogonality
            for c in cols:
                v -= (c @ v) * c
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            cols.append(v / nrm)
        i += 1
    return np.column_stack(cols) if cols else np.zeros((d, 0))


def procrustes(c) -> np.ndarray:
    """Nearest matrix with orthonormal columns in the trace sense:
    ``Z = U V^T`` from the thin SVD of ``c``.

    Rank-deficient inputs (including zero) are completed deterministically
    with identity-based Gram-Schmidt so that ``Z^T Z = I`` always holds;
    the zero matrix maps to the first columns of the identity.
    """
    c = as_matrix(c)
    m, ell = c.shape
    if ell > m:
        raise ValueError("need at least as many rows as columns")
    u, s, vt = np.linalg.svd(c, full_matrices=False)
    rank = 0 if s[0] == 0.0 else int(np.sum(s > s[0] * 1e-13))
    if rank == ell:
        return u @ vt
    u_full = _complete_orthonormal(u[:, :rank], ell)
    v_full = _complete_orthonormal(vt[:rank].T, ell)
    return u_full @ v_full.T


def update_z(state: SolverState, system: AugmentedSystem) -> np.ndarray:
    """Consensus step: Procrustes of ``bar_B^T (bar_Lambda / beta - bar_W)``."""
    bar_w, bar_lam = bar_averages(system, state.w, state.lam)
    c = system.bar_b.T @ (bar_lam / state.beta - bar_w)
    return procrustes(c)


def update_w(
    system: AugmentedSystem,
    state: SolverState,
    j: int,
    z_next: np.ndarray,
    config: SolverConfig,
) -> np.ndarray:
    """Linearized proximal step for view j's weights:
    shrink the gradient move by ``delta / beta``."""
    op = system.operators[j]
    grad = op.a.T @ (op.a @ state.w[j] + op.b @ z_next - state.lam[j] / state.beta)
    return soft_threshold(state.w[j] - config.delta * grad, config.delta / state.beta)


def update_lambda(
    system: AugmentedSystem,
    state: SolverState,
    j: int,
    w_next: np.ndarray,
    z_next: np.ndarray,
) -> np.ndarray:
    """Multiplier step: subtract ``beta`` times the new primal residual."""
    op = system.operators[j]
    return state.lam[j] - state.beta * (op.a @ w_next + op.b @ z_next)


def step_beta(beta: float, config: SolverConfig) -> float:
    """Capped geometric penalty growth."""
    return min(config.beta_max, config.rho * beta)


def convergence_statistics(
    prev: SolverState, nxt: SolverState
) -> tuple[float, float]:
    """Max-over-views scaled multiplier change and scaled weight change,
    both measured with the penalty that produced the step."""
    beta = prev.beta
    r1 = max(
        float(np.linalg.norm(ln - lp)) / beta for lp, ln in zip(prev.lam, nxt.lam)
    )
    r2 = max(
        beta * float(np.linalg.norm(wn - wp)) / max(1.0, float(np.linalg.norm(wp)))
        for wp, wn in zip(prev.w, nxt.w)
    )
    return r1, r2


def check_convergence(
    prev: SolverState, nxt: SolverState, config: SolverConfig
) -> str:
    """Stopping decision: ``"converged"`` when the multiplier statistic is
    within ``eps1`` or (unless in strict mode) the weight statistic is
    within ``eps2``; ``"max_iter"`` at the iteration cap; else
    ``"continue"``."""
    r1, r2 = convergence_statistics(prev, nxt)
    if config.strict_feasibility:
        done = r1 <= config.eps1
    else:
        done = r1 <= config.eps1 or r2 <= config.eps2
    if done:
        return "converged"
    if nxt.k >= config.max_iter:
        return "max_iter"
    return "continue"


def kkt_residuals(state: SolverState, system: AugmentedSystem) -> KktReport:
    """First-order optimality residuals of the current iterate.

    Per entry, the stationarity distance is ``|g - sign(w)|`` where the
    weight is nonzero and ``max(|g| - 1, 0)`` where it is zero, with
    ``g = A_j^T Lambda_j``; views aggregate by Frobenius norm.
    """
    stationarity = []
    feasibility = []
    for op, wj, lj in zip(system.operators, state.w, state.lam):
        g = op.a.T @ lj
        dist = np.where(
            wj != 0.0,
            np.abs(g - np.sign(wj)),
            np.maximum(np.abs(g) - 1.0, 0.0),
        )
        stationarity.append(float(np.linalg.norm(dist)))
        feasibility.append(float(np.linalg.norm(op.a @ wj + op.b @ state.z)))
    ell = state.z.shape[1]
    orth = float(np.linalg.norm(state.z.T @ state.z - np.eye(ell)))
    lam2 = np.zeros((ell, ell))
    for op, lj in zip(system.operators, state.lam):
        lam2 -= (op.b @ state.z).T @ lj
    return KktReport(
        stationarity=tuple(stationarity),
        feasibility=tuple(feasibility),
        orthogonality=orth,
        implied_multiplier=lam2,
    )


def fit(
    dataset: MultiviewDataset,
    config: SolverConfig | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    threads: int | None = None,
) -> tuple[CanonicalModel, IterationTrace, KktReport]:
    """Run the full alternating iteration on a dataset.

    Returns the fitted model (with ``g = Z^T``), the per-iteration trace,
    and the final optimality report. Hitting ``max_iter`` is not an error;
    the outcome is recorded in ``model.info["status"]``. Output is
    deterministic for identical inputs and config, with or without
    per-view parallelism.
    """
    config = config or SolverConfig()
    operators = decompose_views(dataset, rank_tol)
    system = augment(operators)
    state = init_state(system, dataset.ell, config)
    beta0 = state.beta
    trace = IterationTrace()
    status = "max_iter"

    while True:
        z_next = update_z(state, system)

        def advance_view(j: int) -> tuple[np.ndarray, np.ndarray]:
            w_next = update_w(system, state, j, z_next, config)
            return w_next, update_lambda(system, state, j, w_next, z_next)

        stepped = map_in_order(advance_view, range(system.n_views), threads)
        nxt = SolverState(
            w=[wn for wn, _ in stepped],
            z=z_next,
            lam=[ln for _, ln in stepped],
            beta=step_beta(state.beta, config),
            k=state.k + 1,
        )
        primal = tuple(
            float(np.linalg.norm(op.a @ wn + op.b @ z_next))
            for op, wn in zip(system.operators, nxt.w)
        )
        w_changes = tuple(
            state.beta * float(np.linalg.norm(wn - wp)) / max(1.0, float(np.linalg.norm(wp)))
            for wp, wn in zip(state.w, nxt.w)
        )
        trace.records.append(
            TraceRecord(
                k=nxt.k,
                beta=state.beta,
                primal_residuals=primal,
                objective_l1=float(sum(np.abs(wn).sum() for wn in nxt.w)),
                orthogonality_error=float(
                    np.linalg.norm(z_next.T @ z_next - np.eye(dataset.ell))
                ),
                w_changes=w_changes,
            )
        )
        decision = check_convergence(state, nxt, config)
        state = nxt
        if decision != "continue":
            status = decision
            break

    report = kkt_residuals(state, system)
    model = CanonicalModel(
        weights=[w.copy() for w in state.w],
        g=state.z.T.copy(),
        ell=dataset.ell,
        algorithm="sgcca-admm",
        info={
            "status": status,
            "iterations": state.k,
            "beta0": beta0,
            "beta_final": state.beta,
        },
    )
    return model, trace, report
