"""Similarity graph over author-paper nodes.

Three rules connect nodes: co-authorship of the same paper, same author in
the same year, and same author in consecutive years. Rule weights
accumulate per node pair, the matrix is symmetric with a zero diagonal,
and an edge exists iff its accumulated weight is positive. The consecutive
year rule is applied symmetrically (|year difference| = 1) since the graph
is undirected.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .ingest import AuthorPaperNode

__all__ = [
    "RuleWeights",
    "CsrMatrix",
    "SimilarityGraph",
    "build_graph",
    "row_normalize",
    "save_graph",
    "load_graph",
]


@dataclass(frozen=True)
class RuleWeights:
    """Per-rule edge weights: co-author, same-year, consecutive-year."""

    lambda1: float = 1.0
    lambda2: float = 3.0
    lambda3: float = 2.0

    def __post_init__(self):
        if min(self.lambda1, self.lambda2, self.lambda3) < 0:
            raise ValueError("rule weights must be nonnegative")
        if self.lambda1 == self.lambda2 == self.lambda3 == 0:
            raise ValueError("at least one rule weight must be positive")


@dataclass
class CsrMatrix:
    """Minimal CSR container shared by the propagation and ranking kernels."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.indices.shape[0])

    def row_sums(self) -> np.ndarray:
        out = np.zeros(self.n)
        np.add.at(out, np.repeat(np.arange(self.n), np.diff(self.indptr)), self.data)
        return out

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        for i in range(self.n):
            for k in range(self.indptr[i], self.indptr[i + 1]):
                dense[i, self.indices[k]] = self.data[k]
        return dense


@dataclass
class SimilarityGraph:
    """Sparse symmetric weighted graph over author-paper nodes."""

    n: int
    matrix: CsrMatrix

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def degree(self) -> np.ndarray:
        return self.matrix.row_sums()


def _csr_from_pair_weights(n: int, pairs: dict[tuple[int, int], float]) -> CsrMatrix:
    m = len(pairs)
    rows = np.empty(2 * m, dtype=np.int64)
    cols = np.empty(2 * m, dtype=np.int64)
    vals = np.empty(2 * m, dtype=np.float64)
    for k, ((i, j), w) in enumerate(pairs.items()):
        rows[2 * k], cols[2 * k], vals[2 * k] = i, j, w
        rows[2 * k + 1], cols[2 * k + 1], vals[2 * k + 1] = j, i, w
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    np.cumsum(indptr, out=indptr)
    return CsrMatrix(n=n, indptr=indptr, indices=cols, data=vals)


def build_graph(nodes: list[AuthorPaperNode], weights: RuleWeights) -> SimilarityGraph:
    """Evaluate the three rules over all node pairs and accumulate weights.

    Grouping by paper and by author keeps this near-linear in the number of
    rule firings rather than quadratic in nodes. Pairs hit by several
    firings accumulate additively.
    """
    n = len(nodes)
    pair_weights: dict[tuple[int, int], float] = defaultdict(float)

    def bump(i: int, j: int, w: float) -> None:
        if i > j:
            i, j = j, i
        pair_weights[(i, j)] += w

    if weights.lambda1 > 0:
        by_paper: dict[str, list[int]] = defaultdict(list)
        for node in nodes:
            by_paper[node.paper_id].append(node.node_id)
        for members in by_paper.values():
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    bump(members[a], members[b], weights.lambda1)

    if weights.lambda2 > 0 or weights.lambda3 > 0:
        by_author: dict[str, dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
        for node in nodes:
            by_author[node.author_id][node.year].append(node.node_id)
        for year_buckets in by_author.values():
            if weights.lambda2 > 0:
                for members in year_buckets.values():
                    for a in range(len(members)):
                        for b in range(a + 1, len(members)):
                            bump(members[a], members[b], weights.lambda2)
            if weights.lambda3 > 0:
                for year, members in year_buckets.items():
                    nxt = year_buckets.get(year + 1)
                    if not nxt:
                        continue
                    for i in members:
                        for j in nxt:
                            bump(i, j, weights.lambda3)

    return SimilarityGraph(n=n, matrix=_csr_from_pair_weights(n, dict(pair_weights)))


def row_normalize(graph: SimilarityGraph) -> CsrMatrix:
    """Row-stochastic transition matrix; rows of isolated nodes stay zero.

    Normalization is a stability choice: the raw accumulated weights can
    make the iteration diverge, while the normalized operator keeps label
    mass in [0, 1]. Pass the raw matrix downstream instead to reproduce the
    unnormalized iteration.
    """
    m = graph.matrix
    sums = m.row_sums()
    scale = np.repeat(np.where(sums > 0, 1.0 / np.where(sums > 0, sums, 1.0), 0.0),
                      np.diff(m.indptr))
    return CsrMatrix(n=m.n, indptr=m.indptr.copy(), indices=m.indices.copy(),
                     data=m.data * scale)


# ---------------------------------------------------------------------------
# serialization: text triples with a header, exact round-trip
# ---------------------------------------------------------------------------

def save_graph(graph: SimilarityGraph, fh: TextIO) -> None:
    m = graph.matrix
    fh.write(f"{m.n} {m.nnz}\n")
    for i in range(m.n):
        for k in range(m.indptr[i], m.indptr[i + 1]):
            # repr() keeps the shortest digits that round-trip the float64
            fh.write(f"{i} {m.indices[k]} {float(m.data[k])!r}\n")


def load_graph(fh: TextIO) -> SimilarityGraph:
    header = fh.readline().split()
    if len(header) != 2:
        raise ValueError("graph header must be 'n nnz'")
    n, nnz = int(header[0]), int(header[1])
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    for k in range(nnz):
        parts = fh.readline().split()
        if len(parts) != 3:
            raise ValueError(f"bad triple at entry {k}")
        rows[k], cols[k], vals[k] = int(parts[0]), int(parts[1]), float(parts[2])
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    np.cumsum(indptr, out=indptr)
    matrix = CsrMatrix(n=n, indptr=indptr, indices=cols, data=vals)
    return SimilarityGraph(n=n, matrix=matrix)
