"""Label propagation over the similarity graph.

Iterates Y <- W * Y with a push-back step that re-clamps seed rows to their
one-hot start distribution after every multiplication, until the max-norm
change drops below tolerance or the iteration cap is hit. Labels of
unlabeled nodes are then read off by row argmax.

The multiplication is column-separable, so the label matrix can be
processed in column chunks to bound the working set at n x chunk_width.
Every output entry is a per-row dot product accumulated in storage order,
which makes chunked and unchunked runs bitwise identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from . import kernels
from .graph import CsrMatrix
from .ingest import AuthorPaperNode

__all__ = [
    "LabelMatrix",
    "PropagationConfig",
    "PropagationResult",
    "build_label_matrix",
    "propagate",
    "propagate_chunked",
    "readout",
    "fixed_point_residual",
    "save_checkpoint",
    "load_checkpoint",
]

_CHECKPOINT_MAGIC = b"BMCK1\n"


@dataclass
class LabelMatrix:
    """Row-per-node distribution over city labels plus the seed bookkeeping."""

    Y: np.ndarray                 # n x L, float64
    seed_mask: np.ndarray         # n bools
    labels: tuple[str, ...]       # column index -> city_id

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def L(self) -> int:
        return self.Y.shape[1]

    def copy(self) -> "LabelMatrix":
        return LabelMatrix(self.Y.copy(), self.seed_mask.copy(), self.labels)


@dataclass(frozen=True)
class PropagationConfig:
    max_iterations: int = 100
    tolerance: float = 1e-6
    chunk_width: int | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.chunk_width is not None and self.chunk_width < 1:
            raise ValueError("chunk_width must be >= 1")


@dataclass
class PropagationResult:
    labels: LabelMatrix
    iterations: int
    converged: bool


def build_label_matrix(nodes: list[AuthorPaperNode]) -> LabelMatrix:
    """One-hot seed rows from node labels; label columns are the sorted
    distinct seed cities (only seeded cities can ever receive mass)."""
    label_ids = sorted({node.label for node in nodes if node.label is not None})
    col = {city: i for i, city in enumerate(label_ids)}
    n = len(nodes)
    Y = np.zeros((n, max(len(label_ids), 1)))
    seed_mask = np.zeros(n, dtype=bool)
    for node in nodes:
        if node.label is not None:
            Y[node.node_id, col[node.label]] = 1.0
            seed_mask[node.node_id] = True
    return LabelMatrix(Y=Y, seed_mask=seed_mask, labels=tuple(label_ids))


def _run(
    W: CsrMatrix,
    lm: LabelMatrix,
    config: PropagationConfig,
    width: int,
    start_iteration: int = 0,
) -> PropagationResult:
    if W.n != lm.n:
        raise ValueError(f"matrix is {W.n}x{W.n} but label matrix has {lm.n} rows")
    if not lm.seed_mask.any():
        raise ValueError("propagation requires at least one seed label")

    # always copy: the caller's matrix must survive the in-place iteration
    Y = np.array(lm.Y, dtype=np.float64, order="C")
    seed_rows = Y[lm.seed_mask].copy()
    n, L = Y.shape
    width = min(width, L)
    buf = np.empty((n, width))

    iterations = start_iteration
    converged = False
    while iterations < config.max_iterations:
        delta = 0.0
        for c0 in range(0, L, width):
            c1 = min(c0 + width, L)
            block = np.ascontiguousarray(Y[:, c0:c1])
            out = buf[:, : c1 - c0]
            kernels.csr_matmul(W.indptr, W.indices, W.data, block, out)
            out[lm.seed_mask] = seed_rows[:, c0:c1]
            chunk_delta = float(np.abs(out - block).max()) if out.size else 0.0
            if chunk_delta > delta:
                delta = chunk_delta
            Y[:, c0:c1] = out
        iterations += 1
        if delta < config.tolerance:
            converged = True
            break

    return PropagationResult(
        labels=LabelMatrix(Y=Y, seed_mask=lm.seed_mask.copy(), labels=lm.labels),
        iterations=iterations,
        converged=converged,
    )


def propagate(
    W: CsrMatrix,
    lm: LabelMatrix,
    config: PropagationConfig = PropagationConfig(),
    start_iteration: int = 0,
) -> PropagationResult:
    """Full-width propagation (single chunk spanning all label columns)."""
    return _run(W, lm, config, width=lm.L, start_iteration=start_iteration)


def propagate_chunked(
    W: CsrMatrix,
    lm: LabelMatrix,
    config: PropagationConfig,
    start_iteration: int = 0,
) -> PropagationResult:
    """Chunked propagation; bitwise identical to :func:`propagate`."""
    width = config.chunk_width if config.chunk_width is not None else lm.L
    return _run(W, lm, config, width=width, start_iteration=start_iteration)


def readout(lm: LabelMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-node argmax label index and its confidence.

    Ties resolve to the smallest label index; rows with no mass (nodes
    unreachable from any seed) get index -1 and confidence 0.
    """
    assignment = np.argmax(lm.Y, axis=1).astype(np.int64)
    confidence = lm.Y[np.arange(lm.n), assignment]
    assignment[confidence == 0.0] = -1
    return assignment, confidence


def fixed_point_residual(W: CsrMatrix, lm: LabelMatrix) -> float:
    """max |Y - W*Y| over non-seed rows; small at a propagation fixed point."""
    WY = kernels.csr_matmul(W.indptr, W.indices, W.data, np.ascontiguousarray(lm.Y))
    free = ~lm.seed_mask
    if not free.any():
        return 0.0
    return float(np.abs(lm.Y[free] - WY[free]).max())


# ---------------------------------------------------------------------------
# checkpointing
# ---------------------------------------------------------------------------

def save_checkpoint(fh: BinaryIO, lm: LabelMatrix, iteration: int) -> None:
    fh.write(_CHECKPOINT_MAGIC)
    fh.write(struct.pack("<qqq", lm.n, lm.L, iteration))
    fh.write(lm.seed_mask.astype(np.uint8).tobytes())
    label_blob = "\x00".join(lm.labels).encode("utf-8")
    fh.write(struct.pack("<q", len(label_blob)))
    fh.write(label_blob)
    fh.write(np.ascontiguousarray(lm.Y, dtype=np.float64).tobytes())


def load_checkpoint(fh: BinaryIO) -> tuple[LabelMatrix, int]:
    magic = fh.read(len(_CHECKPOINT_MAGIC))
    if magic != _CHECKPOINT_MAGIC:
        raise ValueError("not a propagation checkpoint")
    n, L, iteration = struct.unpack("<qqq", fh.read(24))
    seed_mask = np.frombuffer(fh.read(n), dtype=np.uint8).astype(bool)
    (blob_len,) = struct.unpack("<q", fh.read(8))
    labels = tuple(fh.read(blob_len).decode("utf-8").split("\x00")) if blob_len else ()
    Y = np.frombuffer(fh.read(n * L * 8), dtype=np.float64).reshape(n, L).copy()
    return LabelMatrix(Y=Y, seed_mask=seed_mask, labels=labels), iteration
