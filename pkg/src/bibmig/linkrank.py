"""Link analysis of the directed inter-city migration graph.

Nodes are cities; an edge u -> v carries the number of authors who moved
from u to v. Edge weights feed three analyses: the frequency distribution
of inter-city connections (for power-law fitting), HITS hub/authority
scores (sending vs receiving cities), and PageRank (the stationary
probability that a random migrator sits in a city).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .graph import CsrMatrix
from .sketch import Move

__all__ = [
    "MigrationGraph",
    "HitsScores",
    "RankScores",
    "build_migration_graph",
    "frequency_distribution",
    "hits",
    "pagerank",
    "classify_cities",
]


@dataclass
class MigrationGraph:
    cities: tuple[str, ...]          # sorted city ids; row/col order of adjacency
    adjacency: CsrMatrix             # directed weighted counts
    total_moves: int

    @property
    def n(self) -> int:
        return len(self.cities)

    def edge_weights(self) -> np.ndarray:
        return self.adjacency.data.copy()

    def index_of(self, city: str) -> int:
        return self.cities.index(city)


def build_migration_graph(move_list: Iterable[Move]) -> MigrationGraph:
    """weight(u, v) = number of moves u -> v. Self-loops cannot occur since
    consecutive sketch stations are distinct cities."""
    counts: Counter[tuple[str, str]] = Counter()
    cities: set[str] = set()
    total = 0
    for move in move_list:
        counts[(move.from_city, move.to_city)] += 1
        cities.add(move.from_city)
        cities.add(move.to_city)
        total += 1
    ordered = tuple(sorted(cities))
    index = {city: i for i, city in enumerate(ordered)}
    n = len(ordered)
    triples = sorted((index[u], index[v], w) for (u, v), w in counts.items())
    rows = np.array([t[0] for t in triples], dtype=np.int64)
    cols = np.array([t[1] for t in triples], dtype=np.int64)
    vals = np.array([t[2] for t in triples], dtype=np.float64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    np.cumsum(indptr, out=indptr)
    adjacency = CsrMatrix(n=n, indptr=indptr, indices=cols, data=vals)
    return MigrationGraph(cities=ordered, adjacency=adjacency, total_moves=total)


def frequency_distribution(graph: MigrationGraph, min_count: int = 10) -> np.ndarray:
    """Multiset of edge weights at or above ``min_count``, sorted ascending."""
    weights = graph.edge_weights()
    return np.sort(weights[weights >= min_count])


@dataclass
class HitsScores:
    hub: np.ndarray
    authority: np.ndarray
    iterations: int
    converged: bool
    all_zero: bool = False


def _binary(matrix: CsrMatrix) -> CsrMatrix:
    return CsrMatrix(n=matrix.n, indptr=matrix.indptr, indices=matrix.indices,
                     data=np.ones_like(matrix.data))


def hits(
    graph: MigrationGraph,
    max_iter: int = 100,
    tol: float = 1e-8,
    weighted: bool = True,
) -> HitsScores:
    """Alternating power iteration: a <- A^T h, h <- A a, each half-step
    L2-normalized. Hubs read as sending cities, authorities as receiving
    ones. ``weighted=False`` collapses multiplicities to binary edges.
    """
    if graph.n == 0:
        raise ValueError("empty graph")
    A = graph.adjacency if weighted else _binary(graph.adjacency)
    if A.nnz == 0:
        zeros = np.zeros(graph.n)
        return HitsScores(hub=zeros, authority=zeros.copy(), iterations=0,
                          converged=True, all_zero=True)
    n = graph.n
    h = np.full(n, 1.0 / np.sqrt(n))
    a = np.zeros(n)
    for iteration in range(1, max_iter + 1):
        a_new = kernels.csr_rmatvec(A.indptr, A.indices, A.data, h)
        norm = float(np.linalg.norm(a_new))
        if norm > 0:
            a_new /= norm
        h_new = kernels.csr_matvec(A.indptr, A.indices, A.data, a_new)
        norm = float(np.linalg.norm(h_new))
        if norm > 0:
            h_new /= norm
        delta = max(float(np.abs(a_new - a).max()), float(np.abs(h_new - h).max()))
        a, h = a_new, h_new
        if delta < tol:
            return HitsScores(hub=h, authority=a, iterations=iteration, converged=True)
    return HitsScores(hub=h, authority=a, iterations=max_iter, converged=False)


def pagerank(
    graph: MigrationGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> np.ndarray:
    """Power iteration on the damped row-stochastic migration transition.

    Cities without outgoing moves redistribute uniformly, and the teleport
    term guarantees every entry is at least (1 - damping) / n.
    """
    if not (0.0 < damping < 1.0):
        raise ValueError("damping must lie in (0, 1)")
    if graph.n == 0:
        raise ValueError("empty graph")
    A = graph.adjacency
    n = graph.n
    out_weight = A.row_sums()
    dangling = out_weight == 0.0
    scale = np.repeat(np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, out_weight)),
                      np.diff(A.indptr))
    P = CsrMatrix(n=n, indptr=A.indptr, indices=A.indices, data=A.data * scale)
    x = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    for _ in range(max_iter):
        inflow = kernels.csr_rmatvec(P.indptr, P.indices, P.data, x)
        dangling_mass = float(x[dangling].sum()) / n
        x_new = damping * (inflow + dangling_mass) + teleport
        if float(np.abs(x_new - x).sum()) < tol:
            return x_new
        x = x_new
    return x


@dataclass
class RankScores:
    cities: tuple[str, ...]
    hub: np.ndarray
    authority: np.ndarray
    pagerank: np.ndarray


def classify_cities(
    scores: RankScores,
    hub_quantile: float = 0.9,
    authority_quantile: float = 0.9,
) -> dict[str, str]:
    """Role per city from the hub/authority quantile thresholds.

    High hub only: sender. High authority only: receiver. Both high (well
    balanced, heavy traffic both ways): incubator. Neither: neutral.
    """
    tau_h = float(np.quantile(scores.hub, hub_quantile))
    tau_a = float(np.quantile(scores.authority, authority_quantile))
    roles: dict[str, str] = {}
    for i, city in enumerate(scores.cities):
        high_h = scores.hub[i] >= tau_h
        high_a = scores.authority[i] >= tau_a
        if high_h and high_a:
            roles[city] = "incubator"
        elif high_h:
            roles[city] = "sender"
        elif high_a:
            roles[city] = "receiver"
        else:
            roles[city] = "neutral"
    return roles
