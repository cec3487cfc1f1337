"""Command-line pipeline: synthesize data, fit models, evaluate, benchmark.

Every command materializes its full configuration into a manifest written
alongside its outputs, so a run is reproducible from the manifest alone.
Exit codes: 0 success, 1 numerical failure, 2 usage or input error.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .admm import SolverConfig
from .admm import fit as fit_admm
from .dataio import (
    SyntheticConfig,
    generate_synthetic,
    load_labels,
    load_matrix,
    save_labels,
    save_matrix,
    save_model,
    save_report,
    split,
    write_trace,
)
from .fista import FistaConfig, fit_fixed_g
from .linalg import DEFAULT_RANK_TOL
from .maxvar import fit_maxvar
from .metrics import aroc, basic_report, classify
from .model import CanonicalModel
from .views import MultiviewDataset

ALGO_CHOICES = ("gcca", "sgcca-admm", "sgcca-fista")


@dataclass
class RunManifest:
    """Reproducibility record: one per command invocation."""

    command: str
    config: dict
    input_digests: dict
    seed: int | None
    toolkit_version: str
    started_at: str
    duration_seconds: float


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, manifest: RunManifest) -> None:
    (out_dir / "manifest.json").write_text(
        json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n"
    )


def _parse_floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise click.UsageError(f"{flag} must be a comma-separated number list")


def _parse_ints(text: str, flag: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise click.UsageError(f"{flag} must be a comma-separated integer list")


def _load_views(paths: tuple[str, ...]) -> list[np.ndarray]:
    views = []
    n_samples = None
    first = None
    for path in paths:
        matrix = load_matrix(path)
        if n_samples is None:
            n_samples, first = matrix.shape[1], path
        elif matrix.shape[1] != n_samples:
            raise ValueError(
                f"{path} has {matrix.shape[1]} samples but {first} has {n_samples}"
            )
        views.append(matrix)
    return views


def _center_train_test(
    train: list[np.ndarray], test: list[np.ndarray] | None
) -> tuple[list[np.ndarray], list[np.ndarray] | None]:
    """Center every view with training-set feature means."""
    means = [x.mean(axis=1, keepdims=True) for x in train]
    train_c = [x - mu for x, mu in zip(train, means)]
    test_c = None
    if test is not None:
        test_c = [x - mu for x, mu in zip(test, means)]
    return train_c, test_c


def _fit_algorithm(
    algo: str,
    dataset: MultiviewDataset,
    solver: SolverConfig,
    fista: FistaConfig,
    rank_tol: float,
):
    """Returns (model, trace-or-None)."""
    if algo == "gcca":
        return fit_maxvar(dataset, rank_tol), None
    if algo == "sgcca-admm":
        model, trace, _report = fit_admm(dataset, solver, rank_tol)
        return model, trace
    if algo == "sgcca-fista":
        return fit_fixed_g(dataset, fista, rank_tol), None
    raise ValueError(f"unknown algorithm {algo!r}")


def _guarded(body):
    """Map exceptions to the documented exit codes."""
    try:
        body()
    except click.ClickException:
        raise
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(1)


@click.group()
@click.version_option(version=__version__)
def main():
    """Sparse generalized CCA toolkit."""


@main.command("synth")
@click.option("--dims", default="1000,1500,1700", show_default=True,
              help="Comma-separated view heights.")
@click.option("--samples", default=100, show_default=True, type=int)
@click.option("--sigmas", default="0.3,0.4,0.5", show_default=True,
              help="Comma-separated per-view noise standard deviations.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def cmd_synth(dims, samples, sigmas, seed, out):
    """Generate a synthetic dataset with ground-truth supports."""

    def body():
        started = time.time()
        config = SyntheticConfig(
            dims=_parse_ints(dims, "--dims"),
            m=samples,
            noise_sigmas=_parse_floats(sigmas, "--sigmas"),
            seed=seed,
        )
        dataset, supports = generate_synthetic(config)
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for j, (view, support) in enumerate(zip(dataset.views, supports), start=1):
            save_matrix(view, out_dir / f"view_{j}.csv")
            save_matrix(support.reshape(-1, 1), out_dir / f"support_{j}.csv")
        _write_manifest(out_dir, RunManifest(
            command="synth",
            config={"dims": list(config.dims), "samples": config.m,
                    "sigmas": list(config.noise_sigmas), "seed": seed},
            input_digests={},
            seed=seed,
            toolkit_version=__version__,
            started_at=datetime.fromtimestamp(started, timezone.utc).isoformat(),
            duration_seconds=time.time() - started,
        ))
        click.echo(f"wrote {dataset.n_views} views to {out_dir}")

    _guarded(body)


def _solver_options(fn):
    decorators = [
        click.option("--ell", default=1, show_default=True, type=int),
        click.option("--delta", default=1.0, show_default=True, type=float),
        click.option("--rho", default=1.1, show_default=True, type=float),
        click.option("--beta-max", default=1e4, show_default=True, type=float),
        click.option("--tol1", default=1e-5, show_default=True, type=float),
        click.option("--tol2", default=1e-5, show_default=True, type=float),
        click.option("--max-iter", default=1000, show_default=True, type=int),
        click.option("--strict/--no-strict", default=False, show_default=True,
                     help="Stop only on the multiplier-change criterion."),
        click.option("--rank-tol", default=DEFAULT_RANK_TOL, show_default=True,
                     type=float),
        click.option("--center/--no-center", default=True, show_default=True),
        click.option("--zero-tol", default=1e-6, show_default=True, type=float),
        click.option("--l1-weight", default=1.0, show_default=True, type=float,
                     help="Sparsity penalty weight for the fixed-G variant."),
        click.option("--relative-l1/--absolute-l1", default=False,
                     show_default=True,
                     help="Scale the l1 weight by each column's critical value."),
        click.option("--fista-max-iter", default=500, show_default=True, type=int),
        click.option("--fista-tol", default=1e-6, show_default=True, type=float),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


@main.command("fit")
@click.option("--algo", type=click.Choice(ALGO_CHOICES), required=True)
@click.option("--views", "view_paths", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=0, show_default=True, type=int,
              help="Recorded in the manifest; fitting itself is deterministic.")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@_solver_options
def cmd_fit(algo, view_paths, seed, out, **opts):
    """Fit one algorithm on view matrices and persist the model."""

    def body():
        started = time.time()
        views = _load_views(view_paths)
        if opts["center"]:
            views, _ = _center_train_test(views, None)
        dataset = MultiviewDataset(views=views, ell=opts["ell"])
        solver = SolverConfig(
            delta=opts["delta"], rho=opts["rho"], beta_max=opts["beta_max"],
            eps1=opts["tol1"], eps2=opts["tol2"], max_iter=opts["max_iter"],
            zero_tol=opts["zero_tol"], strict_feasibility=opts["strict"],
        )
        fista = FistaConfig(
            max_iter=opts["fista_max_iter"], tol=opts["fista_tol"],
            l1_weight=opts["l1_weight"], relative_weight=opts["relative_l1"],
        )
        model, trace = _fit_algorithm(algo, dataset, solver, fista, opts["rank_tol"])
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_model(model, out_dir / "model.txt")
        if trace is not None:
            write_trace(trace, out_dir / "trace.tsv")
        _write_manifest(out_dir, RunManifest(
            command="fit",
            config={"algo": algo, "views": list(view_paths), **opts},
            input_digests={p: _sha256(Path(p)) for p in view_paths},
            seed=seed,
            toolkit_version=__version__,
            started_at=datetime.fromtimestamp(started, timezone.utc).isoformat(),
            duration_seconds=time.time() - started,
        ))
        status = model.info.get("status", "done")
        click.echo(f"fitted {algo} ({status}) -> {out_dir / 'model.txt'}")

    _guarded(body)


def _parse_pairs(text: str, n_views: int) -> list[tuple[int, int]]:
    if text == "none":
        return []
    if text == "all":
        return [(i, j) for i in range(n_views) for j in range(i + 1, n_views)]
    pairs = []
    for token in text.split(","):
        try:
            i, j = (int(v) for v in token.split(":"))
        except ValueError:
            raise click.UsageError(
                "--retrieval-pairs must be 'all', 'none', or 'i:j[,i:j...]' (1-based)"
            )
        pairs.append((i - 1, j - 1))
    return pairs


@main.command("eval")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--views", "view_paths", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--train-views", "train_view_paths", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Views used for class centroids; defaults to --views.")
@click.option("--train-labels", "train_labels_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--zero-tol", default=1e-6, show_default=True, type=float)
@click.option("--retrieval-pairs", default="all", show_default=True)
@click.option("--center/--no-center", default=True, show_default=True,
              help="Center evaluation views with training-view feature means.")
@click.option("--out", required=True, type=click.Path(file_okay=False))
def cmd_eval(model_path, view_paths, labels_path, train_view_paths,
             train_labels_path, zero_tol, retrieval_pairs, center, out):
    """Evaluate a stored model on view matrices."""

    def body():
        from .dataio import load_model

        started = time.time()
        model = load_model(model_path)
        views = _load_views(view_paths)
        train_views = _load_views(train_view_paths) if train_view_paths else None
        if center:
            if train_views is not None:
                train_views, views = _center_train_test(train_views, views)
            else:
                views, _ = _center_train_test(views, None)
        labels = load_labels(labels_path) if labels_path else None
        dataset = MultiviewDataset(views=views, ell=model.ell, labels=labels)

        report = basic_report(model, dataset, zero_tol)
        if labels is not None:
            if train_views is not None:
                train_labels = (
                    load_labels(train_labels_path) if train_labels_path else None
                )
                if train_labels is None:
                    raise ValueError("--train-views needs --train-labels for accuracy")
                train_ds = MultiviewDataset(
                    views=train_views, ell=model.ell, labels=train_labels
                )
            else:
                train_ds = dataset
            report.accuracy = classify(model, train_ds, dataset.views[0], labels)
        pairs = _parse_pairs(retrieval_pairs, dataset.n_views)
        if pairs and dataset.n_samples >= 2:
            report.aroc_pairs = {pair: aroc(model, dataset, pair) for pair in pairs}
            report.aroc_avg = float(np.mean(list(report.aroc_pairs.values())))

        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_report(report, out_dir / "report.txt")
        inputs = list(view_paths) + list(train_view_paths) + [model_path]
        if labels_path:
            inputs.append(labels_path)
        if train_labels_path:
            inputs.append(train_labels_path)
        _write_manifest(out_dir, RunManifest(
            command="eval",
            config={"model": model_path, "views": list(view_paths),
                    "labels": labels_path, "zero_tol": zero_tol,
                    "retrieval_pairs": retrieval_pairs, "center": center},
            input_digests={p: _sha256(Path(p)) for p in inputs},
            seed=None,
            toolkit_version=__version__,
            started_at=datetime.fromtimestamp(started, timezone.utc).isoformat(),
            duration_seconds=time.time() - started,
        ))
        click.echo(f"report -> {out_dir / 'report.txt'}")

    _guarded(body)


def _support_recovery(model: CanonicalModel, supports, zero_tol: float) -> list[float]:
    """Per view, the fraction of true-zero loading coordinates whose fitted
    weights are all below zero_tol."""
    recovery = []
    for w, v in zip(model.weights, supports):
        zero_rows = v.reshape(-1) == 0.0
        recovery.append(float(np.mean(np.abs(w[zero_rows, :]) <= zero_tol)))
    return recovery


@main.command("bench")
@click.option("--repeats", default=5, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int,
              help="Master seed; per-run seeds derive from it.")
@click.option("--dims", default="1000,1500,1700", show_default=True)
@click.option("--samples", default=100, show_default=True, type=int)
@click.option("--sigmas", default="0.3,0.4,0.5", show_default=True)
@click.option("--train-fraction", default=0.5, show_default=True, type=float)
@click.option("--algos", default="gcca,sgcca-admm,sgcca-fista", show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@_solver_options
def cmd_bench(repeats, seed, dims, samples, sigmas, train_fraction, algos, out, **opts):
    """Repeat synth -> split -> fit -> eval and aggregate the metrics."""

    def body():
        started = time.time()
        if repeats < 1:
            raise ValueError("--repeats must be at least 1")
        algo_list = [a.strip() for a in algos.split(",") if a.strip()]
        for algo in algo_list:
            if algo not in ALGO_CHOICES:
                raise ValueError(f"unknown algorithm {algo!r}")
        solver = SolverConfig(
            delta=opts["delta"], rho=opts["rho"], beta_max=opts["beta_max"],
            eps1=opts["tol1"], eps2=opts["tol2"], max_iter=opts["max_iter"],
            zero_tol=opts["zero_tol"], strict_feasibility=opts["strict"],
        )
        fista = FistaConfig(
            max_iter=opts["fista_max_iter"], tol=opts["fista_tol"],
            l1_weight=opts["l1_weight"], relative_weight=opts["relative_l1"],
        )
        derived = np.random.SeedSequence(seed).generate_state(2 * repeats)
        dim_tuple = _parse_ints(dims, "--dims")
        sigma_tuple = _parse_floats(sigmas, "--sigmas")

        columns = ["run", "algo", "train_correlation", "test_correlation",
                   "train_reconstruction_error", "sparsity_avg"]
        n_views = len(dim_tuple)
        columns += [f"sparsity_view_{j + 1}" for j in range(n_views)]
        columns += [f"support_recovery_view_{j + 1}" for j in range(n_views)]
        rows = []
        for run in range(repeats):
            synth_seed = int(derived[2 * run])
            split_seed = int(derived[2 * run + 1])
            try:
                config = SyntheticConfig(
                    dims=dim_tuple, m=samples, noise_sigmas=sigma_tuple,
                    seed=synth_seed, ell=opts["ell"],
                )
                dataset, supports = generate_synthetic(config)
                train, test = split(dataset, train_fraction, split_seed)
                train_views, test_views = train.views, test.views
                if opts["center"]:
                    train_views, test_views = _center_train_test(
                        train_views, test_views
                    )
                train_ds = MultiviewDataset(views=train_views, ell=opts["ell"])
                test_ds = MultiviewDataset(views=test_views, ell=opts["ell"])
                for algo in algo_list:
                    model, _trace = _fit_algorithm(
                        algo, train_ds, solver, fista, opts["rank_tol"]
                    )
                    report = basic_report(model, train_ds, opts["zero_tol"])
                    from .metrics import total_correlation

                    row = [run, algo, report.correlation,
                           total_correlation(model, test_ds),
                           report.reconstruction_error, report.sparsity_avg]
                    row += report.sparsity_per_view
                    row += _support_recovery(model, supports, opts["zero_tol"])
                    rows.append(row)
            except Exception as exc:
                raise ValueError(
                    f"run {run} (synth seed {synth_seed}) failed: {exc}"
                ) from exc

        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        runs_lines = ["\t".join(columns)]
        for row in rows:
            runs_lines.append("\t".join(
                str(v) if isinstance(v, (int, str)) else repr(float(v))
                for v in row
            ))
        (out_dir / "bench_runs.tsv").write_text("\n".join(runs_lines) + "\n")

        metric_names = columns[2:]
        summary_lines = ["\t".join(["algo", "metric", "mean", "std"])]
        for algo in algo_list:
            algo_rows = [row for row in rows if row[1] == algo]
            for idx, name in enumerate(metric_names, start=2):
                values = np.array([row[idx] for row in algo_rows], dtype=float)
                summary_lines.append("\t".join([
                    algo, name, repr(float(values.mean())),
                    repr(float(values.std())),
                ]))
        (out_dir / "bench_summary.tsv").write_text("\n".join(summary_lines) + "\n")

        _write_manifest(out_dir, RunManifest(
            command="bench",
            config={"repeats": repeats, "dims": list(dim_tuple),
                    "samples": samples, "sigmas": list(sigma_tuple),
                    "train_fraction": train_fraction, "algos": algo_list,
                    **opts},
            input_digests={},
            seed=seed,
            toolkit_version=__version__,
            started_at=datetime.fromtimestamp(started, timezone.utc).isoformat(),
            duration_seconds=time.time() - started,
        ))
        click.echo(f"aggregates -> {out_dir / 'bench_summary.tsv'}")

    _guarded(body)


if __name__ == "__main__":
    main()
