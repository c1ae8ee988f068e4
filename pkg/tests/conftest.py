"""Shared fixtures: the eight-paper running example and dense oracles."""

from __future__ import annotations

import io
import json

import numpy as np
import pytest

from bibmig.graph import CsrMatrix, RuleWeights, build_graph
from bibmig.ingest import build_nodes, load_gazetteer, parse_corpus

# city ids as produced by the example gazetteer below
GREEN = "greenville_de"
BLUE = "blueton_fr"
RED = "redford_us"

EXAMPLE_CORPUS = [
    {"paper_id": "p1", "year": 2000, "authors": ["A1"],
     "affiliations": [{"author": "A1", "text": "Green Univ."}]},
    {"paper_id": "p2", "year": 2000, "authors": ["A2"],
     "affiliations": [{"author": "A2", "text": "Blue Institute"}]},
    {"paper_id": "p3", "year": 2001, "authors": ["A2"],
     "affiliations": [{"author": "A2", "text": "Red Lab"}]},
    {"paper_id": "p4", "year": 2002, "authors": ["A1", "A2"]},
    {"paper_id": "p5", "year": 2002, "authors": ["A1"]},
    {"paper_id": "p6", "year": 2003, "authors": ["A2"],
     "affiliations": [{"author": "A2", "text": "Red Lab"}]},
    {"paper_id": "p7", "year": 2004, "authors": ["A1"],
     "affiliations": [{"author": "A1", "text": "Red Lab"}]},
    {"paper_id": "p8", "year": 2004, "authors": ["A2"],
     "affiliations": [{"author": "A2", "text": "Green Univ."}]},
]

EXAMPLE_GAZETTEER = """key,city,country,continent,lat,lon
green univ,Greenville,DE,Europe,50.7,7.1
blue institute,Blueton,FR,Europe,48.8,2.3
red lab,Redford,US,North America,42.3,-71.0
"""


def example_corpus_lines() -> list[str]:
    return [json.dumps(record) for record in EXAMPLE_CORPUS]


@pytest.fixture
def example_gazetteer():
    return load_gazetteer(io.StringIO(EXAMPLE_GAZETTEER))


@pytest.fixture
def example_records():
    records, skips = parse_corpus(example_corpus_lines())
    assert len(skips) == 0
    return records


@pytest.fixture
def example_nodes(example_records, example_gazetteer):
    nodes, conflicts = build_nodes(example_records, example_gazetteer)
    assert conflicts == []
    return nodes


@pytest.fixture
def node_index(example_nodes):
    return {(n.author_id, n.paper_id): n.node_id for n in example_nodes}


@pytest.fixture
def example_graph(example_nodes):
    return build_graph(example_nodes, RuleWeights(1.0, 3.0, 2.0))


@pytest.fixture
def example_inputs(tmp_path):
    """Corpus and gazetteer written to disk for CLI-level tests."""
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text("\n".join(example_corpus_lines()) + "\n")
    gazetteer = tmp_path / "gazetteer.csv"
    gazetteer.write_text(EXAMPLE_GAZETTEER)
    return corpus, gazetteer


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def dense_rule_oracle(nodes, weights: RuleWeights) -> np.ndarray:
    """O(n^2) literal evaluation of the three rule predicates."""
    n = len(nodes)
    W = np.zeros((n, n))
    for a in nodes:
        for b in nodes:
            if a.node_id == b.node_id:
                continue
            w = 0.0
            if a.paper_id == b.paper_id:
                w += weights.lambda1
            if a.author_id == b.author_id and a.year == b.year:
                w += weights.lambda2
            if a.author_id == b.author_id and abs(a.year - b.year) == 1:
                w += weights.lambda3
            W[a.node_id, b.node_id] = w
    return W


def harmonic_solve(W_dense: np.ndarray, Y0: np.ndarray, seed_mask: np.ndarray) -> np.ndarray:
    """Dense fixed point of clamped propagation:
    Y_U = (I - W_UU)^-1 W_US Y_S, seed rows kept at Y0."""
    free = ~seed_mask
    Y = Y0.copy()
    if free.any():
        W_uu = W_dense[np.ix_(free, free)]
        W_us = W_dense[np.ix_(free, seed_mask)]
        rhs = W_us @ Y0[seed_mask]
        Y[free] = np.linalg.solve(np.eye(W_uu.shape[0]) - W_uu, rhs)
    return Y


def csr_to_dense(matrix: CsrMatrix) -> np.ndarray:
    return matrix.to_dense()


def random_transition_graph(rng: np.random.Generator, n: int, extra_edges: int):
    """Random connected-ish symmetric weighted graph, row-normalized.

    Returns (CsrMatrix, dense) for oracle comparisons.
    """
    dense = np.zeros((n, n))
    for _ in range(extra_edges):
        i, j = rng.integers(0, n, 2)
        if i == j:
            continue
        w = float(rng.integers(1, 5))
        dense[i, j] += w
        dense[j, i] += w
    sums = dense.sum(axis=1, keepdims=True)
    sums[sums == 0] = 1.0
    normalized = dense / sums
    return dense_to_csr(normalized), normalized


def random_label_problem(rng: np.random.Generator, n: int, L: int,
                         seed_fraction: float = 0.2, avg_degree: float = 4.0):
    """Random propagation instance with every component holding a seed.

    Returns (W row-stochastic CsrMatrix, LabelMatrix, dense W).
    """
    from bibmig.propagate import LabelMatrix

    csr, dense = random_transition_graph(rng, n, int(n * avg_degree / 2))
    seed_mask = rng.random(n) < seed_fraction
    # force one seed per connected component (isolated nodes count as components)
    adjacency = dense > 0
    unvisited = set(range(n))
    while unvisited:
        start = min(unvisited)
        stack = [start]
        component = []
        while stack:
            i = stack.pop()
            if i not in unvisited:
                continue
            unvisited.discard(i)
            component.append(i)
            stack.extend(np.nonzero(adjacency[i])[0].tolist())
        if not seed_mask[component].any():
            seed_mask[component[0]] = True
    Y = np.zeros((n, L))
    labels = rng.integers(0, L, n)
    Y[seed_mask, labels[seed_mask]] = 1.0
    lm = LabelMatrix(Y=Y, seed_mask=seed_mask,
                     labels=tuple(f"c{i}" for i in range(L)))
    return csr, lm, dense


def dense_to_csr(dense: np.ndarray) -> CsrMatrix:
    n = dense.shape[0]
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = []
    data = []
    for i in range(n):
        cols = np.nonzero(dense[i])[0]
        indptr[i + 1] = indptr[i] + cols.size
        indices.extend(cols.tolist())
        data.extend(dense[i, cols].tolist())
    return CsrMatrix(n=n, indptr=indptr,
                     indices=np.asarray(indices, dtype=np.int64),
                     data=np.asarray(data, dtype=np.float64))
