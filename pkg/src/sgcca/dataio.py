"""File ingestion, the synthetic generator, splitting, and persistence.

Matrix files are comma-separated text, one feature row per line, samples
as columns, with optional ``#`` comment lines. Labels are one class token
per line, aligned to sample order. Models and reports use self-describing
structured text with a version header. All random generation goes through
the PCG64 generator so a seed reproduces across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .admm import IterationTrace
from .linalg import as_matrix
from .metrics import MetricsReport
from .model import CanonicalModel
from .views import MultiviewDataset

MODEL_FORMAT_HEADER = "#sgcca-model v1"
REPORT_FORMAT_HEADER = "#sgcca-report v1"

# Ordered (value, fraction) segments of each ground-truth loading vector.
DEFAULT_SUPPORT_PATTERNS = (
    ((1.0, 0.2), (-1.0, 0.3), (0.0, 0.5)),
    ((0.0, 2.0 / 3.0), (1.0, 2.0 / 15.0), (-1.0, 1.0 / 5.0)),
    ((1.0, 2.0 / 17.0), (0.0, 12.0 / 17.0), (-1.0, 3.0 / 17.0)),
)


@dataclass(frozen=True)
class SyntheticConfig:
    """Rank-one-plus-noise multiview generator settings.

    Each view is ``v_j u^T + eps_j`` with a shared latent ``u ~ N(0, 1)``,
    a blockwise +1/-1/0 loading vector ``v_j`` laid out by
    ``support_patterns``, and i.i.d. Gaussian noise of per-view standard
    deviation ``noise_sigmas[j]``. Default heights are one tenth of the
    reference experiment's 10000/15000/17000.
    """

    dims: tuple[int, ...] = (1000, 1500, 1700)
    m: int = 100
    support_patterns: tuple = DEFAULT_SUPPORT_PATTERNS
    noise_sigmas: tuple[float, ...] = (0.3, 0.4, 0.5)
    seed: int = 0
    ell: int = 1

    def __post_init__(self):
        if not (len(self.dims) == len(self.support_patterns) == len(self.noise_sigmas)):
            raise ValueError("dims, support_patterns, and noise_sigmas must align")
        if len(self.dims) < 2:
            raise ValueError("need at least two views")
        if self.m < 2:
            raise ValueError("need at least two samples")
        for sigma in self.noise_sigmas:
            if sigma < 0:
                raise ValueError("noise sigmas must be nonnegative")
        for pattern in self.support_patterns:
            total = sum(frac for _, frac in pattern)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"support fractions sum to {total}, expected 1")


def _loading_vector(n: int, pattern) -> np.ndarray:
    v = np.zeros(n)
    start = 0
    acc = 0.0
    for value, fraction in pattern:
        acc += fraction
        end = int(round(acc * n))
        v[start:end] = value
        start = end
    return v


def generate_synthetic(
    config: SyntheticConfig,
) -> tuple[MultiviewDataset, list[np.ndarray]]:
    """Draw one dataset; returns it with the exact loading vectors so
    recovery can be scored against the true zero pattern.

    The draw order is fixed (shared latent first, then per-view noise), so
    a seed fully determines the output.
    """
    rng = np.random.Generator(np.random.PCG64(config.seed))
    u = rng.standard_normal(config.m)
    views = []
    supports = []
    for n, pattern, sigma in zip(
        config.dims, config.support_patterns, config.noise_sigmas
    ):
        v = _loading_vector(n, pattern)
        noise = rng.standard_normal((n, config.m)) * sigma
        views.append(np.outer(v, u) + noise)
        supports.append(v)
    return MultiviewDataset(views=views, ell=config.ell), supports


def split(
    dataset: MultiviewDataset, train_fraction: float, seed: int
) -> tuple[MultiviewDataset, MultiviewDataset]:
    """Random column partition shared by every view (and labels)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    m = dataset.n_samples
    n_train = int(round(train_fraction * m))
    if n_train < 1 or n_train >= m:
        raise ValueError(
            f"degenerate split: {n_train} train / {m - n_train} test samples"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(m)
    train_idx, test_idx = perm[:n_train], perm[n_train:]

    def take(idx):
        views = [x[:, idx] for x in dataset.views]
        labels = None
        if dataset.labels is not None:
            labels = [dataset.labels[i] for i in idx]
        return MultiviewDataset(views=views, ell=dataset.ell, labels=labels)

    return take(train_idx), take(test_idx)


def _format_float(x: float) -> str:
    return repr(float(x))


def save_matrix(matrix, path) -> None:
    matrix = as_matrix(matrix)
    lines = [",".join(_format_float(v) for v in row) for row in matrix]
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix(path) -> np.ndarray:
    """Parse a comma-separated matrix file; malformed rows and non-numeric
    tokens raise with the offending line number."""
    path = Path(path)
    rows = []
    width = None
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split(",")
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise ValueError(
                f"{path}:{line_no}: row has {len(tokens)} entries, expected {width}"
            )
        try:
            rows.append([float(t) for t in tokens])
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: non-numeric entry") from exc
    if not rows:
        raise ValueError(f"{path}: no matrix rows found")
    return as_matrix(np.array(rows), str(path))


def save_labels(labels, path) -> None:
    Path(path).write_text("\n".join(str(token) for token in labels) + "\n")


def load_labels(path) -> list[str]:
    path = Path(path)
    labels = [line.strip() for line in path.read_text().splitlines() if line.strip()]
    if not labels:
        raise ValueError(f"{path}: no labels found")
    return labels


def _write_array_block(lines: list[str], tag: str, array: np.ndarray) -> None:
    rows, cols = array.shape
    zero_fraction = float(np.mean(array == 0.0))
    if zero_fraction > 0.5:
        nonzero = np.argwhere(array != 0.0)
        lines.append(f"{tag} sparse {rows} {cols} {len(nonzero)}")
        for r, c in nonzero:
            lines.append(f"{r},{c},{_format_float(array[r, c])}")
    else:
        lines.append(f"{tag} dense {rows} {cols}")
        for row in array:
            lines.append(",".join(_format_float(v) for v in row))


class _BlockReader:
    def __init__(self, path: Path):
        self.path = path
        self.lines = path.read_text().splitlines()
        self.pos = 0

    def next_line(self) -> str:
        if self.pos >= len(self.lines):
            raise ValueError(f"{self.path}: truncated file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def read_array(self, expected_tag: str) -> np.ndarray:
        header = self.next_line().split()
        if len(header) < 4 or " ".join(header[: len(expected_tag.split())]) != expected_tag:
            raise ValueError(
                f"{self.path}:{self.pos}: expected '{expected_tag}' block"
            )
        kind = header[len(expected_tag.split())]
        shape_at = len(expected_tag.split()) + 1
        rows, cols = int(header[shape_at]), int(header[shape_at + 1])
        if kind == "dense":
            data = np.empty((rows, cols))
            for r in range(rows):
                tokens = self.next_line().split(",")
                if len(tokens) != cols:
                    raise ValueError(f"{self.path}:{self.pos}: bad row width")
                data[r] = [float(t) for t in tokens]
            return data
        if kind == "sparse":
            nnz = int(header[shape_at + 2])
            data = np.zeros((rows, cols))
            for _ in range(nnz):
                r, c, value = self.next_line().split(",")
                data[int(r), int(c)] = float(value)
            return data
        raise ValueError(f"{self.path}:{self.pos}: unknown block kind {kind!r}")


def save_model(model: CanonicalModel, path) -> None:
    """Persist a fitted model; numeric payload round-trips exactly."""
    lines = [MODEL_FORMAT_HEADER]
    lines.append(f"algorithm {model.algorithm}")
    lines.append(f"ell {model.ell}")
    lines.append(f"views {model.n_views}")
    for key in sorted(model.info):
        lines.append(f"info {key} {model.info[key]}")
    for j, w in enumerate(model.weights):
        _write_array_block(lines, f"weights {j}", w)
    _write_array_block(lines, "g", model.g)
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> CanonicalModel:
    path = Path(path)
    reader = _BlockReader(path)
    header = reader.next_line()
    if not header.startswith("#sgcca-model"):
        raise ValueError(f"{path}: not a model file")
    if header != MODEL_FORMAT_HEADER:
        raise ValueError(
            f"{path}: unsupported model format version {header!r}"
        )
    fields: dict[str, str] = {}
    info: dict[str, str] = {}
    while True:
        line = reader.next_line()
        parts = line.split(maxsplit=1)
        if parts[0] == "info":
            key, value = parts[1].split(maxsplit=1)
            info[key] = value
        elif parts[0] in ("algorithm", "ell", "views"):
            fields[parts[0]] = parts[1]
        else:
            reader.pos -= 1
            break
    missing = {"algorithm", "ell", "views"} - set(fields)
    if missing:
        raise ValueError(f"{path}: missing header fields {sorted(missing)}")
    n_views = int(fields["views"])
    weights = [reader.read_array(f"weights {j}") for j in range(n_views)]
    g = reader.read_array("g")
    return CanonicalModel(
        weights=weights,
        g=g,
        ell=int(fields["ell"]),
        algorithm=fields["algorithm"],
        info=info,
    )


def save_report(report: MetricsReport, path) -> None:
    """Write a metrics report as structured text, one quantity per line."""
    lines = [REPORT_FORMAT_HEADER]
    lines.append(f"correlation {_format_float(report.correlation)}")
    lines.append(
        f"reconstruction_error {_format_float(report.reconstruction_error)}"
    )
    for j, value in enumerate(report.sparsity_per_view):
        lines.append(f"sparsity_view_{j + 1} {_format_float(value)}")
    lines.append(f"sparsity_avg {_format_float(report.sparsity_avg)}")
    if report.accuracy is not None:
        lines.append(f"accuracy {_format_float(report.accuracy)}")
    if report.aroc_pairs is not None:
        for (i, j), value in sorted(report.aroc_pairs.items()):
            lines.append(f"aroc_{i + 1}_{j + 1} {_format_float(value)}")
    if report.aroc_avg is not None:
        lines.append(f"aroc_avg {_format_float(report.aroc_avg)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_trace(trace: IterationTrace, path) -> None:
    """Write the iteration trace as a tab-delimited table."""
    lines = ["\t".join(trace.column_names())]
    for row in trace.rows():
        lines.append(
            "\t".join(str(v) if isinstance(v, int) else _format_float(v) for v in row)
        )
    Path(path).write_text("\n".join(lines) + "\n")
