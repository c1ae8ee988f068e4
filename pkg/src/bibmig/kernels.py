"""CSR matrix kernels with a numba fast path and a pure-numpy fallback.

The propagation inner loop (sparse x dense multiply) dominates runtime on
large corpora, so it is compiled with numba when available. Both backends
honour the same determinism contract: every output entry is accumulated
over the row's stored nonzeros in storage order. Because label-column
chunking never reorders that per-entry sum, chunked and unchunked
propagation are bitwise identical on either backend.

Backend selection: set ``BIBMIG_BACKEND=numpy`` or ``BIBMIG_BACKEND=numba``
in the environment before import; the default is numba when importable.
``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_ENV_VAR = "BIBMIG_BACKEND"


def _pick_backend() -> str:
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            warnings.warn(f"{_ENV_VAR}=numba requested but numba is not importable; "
                          "falling back to numpy", RuntimeWarning)
            return "numpy"
        return "numba"
    if choice:
        warnings.warn(f"unknown {_ENV_VAR}={choice!r}; using default", RuntimeWarning)
    return "numba" if HAS_NUMBA else "numpy"


_BACKEND = _pick_backend()


def get_backend() -> str:
    """Active kernel backend, either 'numba' or 'numpy'."""
    return _BACKEND


def set_backend(name: str) -> None:
    """Override the backend at runtime (mainly for tests and benchmarks)."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    _BACKEND = name


# ---------------------------------------------------------------------------
# numpy fallback path
# ---------------------------------------------------------------------------

def _expand_rows(indptr: np.ndarray) -> np.ndarray:
    n = indptr.shape[0] - 1
    return np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))


def csr_matmul_numpy(indptr, indices, data, dense, out):
    # np.add.at is unbuffered and applies updates in index order, matching
    # the numba kernel's per-row accumulation order exactly.
    out[:] = 0.0
    rows = _expand_rows(indptr)
    np.add.at(out, rows, data[:, None] * dense[indices])
    return out


def csr_matvec_numpy(indptr, indices, data, x, out):
    out[:] = 0.0
    rows = _expand_rows(indptr)
    np.add.at(out, rows, data * x[indices])
    return out


def csr_rmatvec_numpy(indptr, indices, data, x, out):
    """out = A.T @ x for A in CSR form."""
    out[:] = 0.0
    rows = _expand_rows(indptr)
    np.add.at(out, indices, data * x[rows])
    return out


# ---------------------------------------------------------------------------
# numba fast path
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _csr_matmul_nb(indptr, indices, data, dense, out):
        n = indptr.shape[0] - 1
        width = dense.shape[1]
        for i in range(n):
            for l in range(width):
                out[i, l] = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                w = data[k]
                j = indices[k]
                for l in range(width):
                    out[i, l] += w * dense[j, l]
        return out

    @njit(cache=True)
    def _csr_matvec_nb(indptr, indices, data, x, out):
        n = indptr.shape[0] - 1
        for i in range(n):
            acc = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                acc += data[k] * x[indices[k]]
            out[i] = acc
        return out

    @njit(cache=True)
    def _csr_rmatvec_nb(indptr, indices, data, x, out):
        n = indptr.shape[0] - 1
        for j in range(out.shape[0]):
            out[j] = 0.0
        for i in range(n):
            xi = x[i]
            for k in range(indptr[i], indptr[i + 1]):
                out[indices[k]] += data[k] * xi
        return out


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def csr_matmul(indptr, indices, data, dense, out=None):
    """out = A @ dense for an n x n CSR matrix A and an n x L dense matrix."""
    if out is None:
        out = np.empty((indptr.shape[0] - 1, dense.shape[1]), dtype=np.float64)
    if _BACKEND == "numba":
        return _csr_matmul_nb(indptr, indices, data, dense, out)
    return csr_matmul_numpy(indptr, indices, data, dense, out)


def csr_matvec(indptr, indices, data, x, out=None):
    """out = A @ x."""
    if out is None:
        out = np.empty(indptr.shape[0] - 1, dtype=np.float64)
    if _BACKEND == "numba":
        return _csr_matvec_nb(indptr, indices, data, x, out)
    return csr_matvec_numpy(indptr, indices, data, x, out)


def csr_rmatvec(indptr, indices, data, x, out=None):
    """out = A.T @ x; ``out`` must have length equal to A's column count."""
    if out is None:
        out = np.empty(indptr.shape[0] - 1, dtype=np.float64)
    if _BACKEND == "numba":
        return _csr_rmatvec_nb(indptr, indices, data, x, out)
    return csr_rmatvec_numpy(indptr, indices, data, x, out)
