"""
Sparse matrix carrier and the distance / sorting kernels of the pipeline.

The in-memory ``SparseMatrix`` is a canonical ``scipy.sparse.csr_matrix``:
float64 values, column indices sorted within each row, no duplicate and no
explicitly stored zero entries. Every public function accepts dense arrays too
and CSR-encodes them on entry.
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from core.errors import DegenerateRow, InvalidShape, InvalidValue
from core.params import DistanceMetric

logger = logging.getLogger(__name__)

SparseMatrix = sp.csr_matrix
MatrixLike = Union[sp.spmatrix, np.ndarray, Sequence[Sequence[float]]]

# Squared distances below this fraction of the squared norms are recomputed
# from explicit differences; the norm expansion cannot resolve them.
_CANCELLATION_RTOL = 1e-9
_QUERY_CHUNK = 256
_EXACT_CHUNK = 65536


# ------------------------------------------------------------------ #
# Construction
# ------------------------------------------------------------------ #

def _check_finite(values: np.ndarray) -> None:
    if values.size and not np.all(np.isfinite(values)):
        raise InvalidValue("matrix contains NaN or infinite entries")


def from_dense(values: MatrixLike) -> SparseMatrix:
    """Encode a row-major dense grid as canonical CSR."""
    dense = np.asarray(values, dtype=np.float64)
    if dense.ndim == 1:
        dense = dense.reshape(1, -1) if dense.size else dense.reshape(0, 0)
    if dense.ndim != 2:
        raise InvalidShape(f"expected a 2-D grid, got {dense.ndim} dimensions")
    _check_finite(dense)
    return to_csr(sp.csr_matrix(dense))


def to_csr(X: MatrixLike) -> SparseMatrix:
    """Return ``X`` as canonical CSR (copying only when needed)."""
    if not sp.issparse(X):
        return from_dense(X)

    matrix = sp.csr_matrix(X, dtype=np.float64)
    _check_finite(matrix.data)
    if not matrix.has_canonical_format:
        matrix.sum_duplicates()
    if np.any(matrix.data == 0):
        matrix.eliminate_zeros()
    if not matrix.has_sorted_indices:
        matrix.sort_indices()
    return matrix


def to_dense(X: MatrixLike) -> np.ndarray:
    if sp.issparse(X):
        return X.toarray()
    return np.asarray(X, dtype=np.float64)


def density(X: MatrixLike) -> float:
    """Fraction of stored nonzeros: nnz / (rows * cols)."""
    matrix = to_csr(X)
    n_rows, n_cols = matrix.shape
    if n_rows * n_cols == 0:
        raise InvalidShape("density undefined for an empty shape")
    return matrix.nnz / float(n_rows * n_cols)


def take_rows(X: MatrixLike, rows: Optional[Sequence[int]]) -> Union[SparseMatrix, np.ndarray]:
    """Row subset that keeps the storage type (CSR stays CSR)."""
    if rows is None:
        return X
    index = np.asarray(rows, dtype=np.int64)
    return X[index]


# ------------------------------------------------------------------ #
# Norms and distances
# ------------------------------------------------------------------ #

def row_norms(X: MatrixLike, squared: bool = False) -> np.ndarray:
    if sp.issparse(X):
        sq = np.asarray(X.multiply(X).sum(axis=1)).ravel()
    else:
        dense = np.asarray(X, dtype=np.float64)
        sq = np.einsum("ij,ij->i", dense, dense)
    return sq if squared else np.sqrt(sq)


def _gram(A, B) -> np.ndarray:
    product = A @ B.T
    if sp.issparse(product):
        return product.toarray()
    return np.asarray(product, dtype=np.float64)


def _exact_sq_distances(A, B, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    """Squared distances of the row pairs (A[ii], B[jj]) from explicit differences."""
    result = np.empty(ii.size, dtype=np.float64)
    for start in range(0, ii.size, _EXACT_CHUNK):
        stop = start + _EXACT_CHUNK
        diff = A[ii[start:stop]] - B[jj[start:stop]]
        if sp.issparse(diff):
            result[start:stop] = np.asarray(diff.multiply(diff).sum(axis=1)).ravel()
        else:
            result[start:stop] = np.einsum("ij,ij->i", diff, diff)
    return result


def _euclidean_block(A, B) -> np.ndarray:
    na = row_norms(A, squared=True)
    nb = row_norms(B, squared=True)
    sq = na[:, None] + nb[None, :] - 2.0 * _gram(A, B)
    np.maximum(sq, 0.0, out=sq)

    scale = na[:, None] + nb[None, :]
    suspect_i, suspect_j = np.nonzero(sq <= _CANCELLATION_RTOL * scale)
    if suspect_i.size:
        sq[suspect_i, suspect_j] = _exact_sq_distances(A, B, suspect_i, suspect_j)
    return np.sqrt(sq)


def _cosine_block(A, B) -> np.ndarray:
    na = row_norms(A)
    nb = row_norms(B)
    if np.any(na == 0) or np.any(nb == 0):
        raise DegenerateRow("cosine distance undefined for a zero-norm row")
    similarity = _gram(A, B) / np.outer(na, nb)
    np.clip(similarity, -1.0, 1.0, out=similarity)
    return 1.0 - similarity


def pairwise_distances(
    X: MatrixLike,
    rows: Optional[Sequence[int]] = None,
    cols: Optional[Sequence[int]] = None,
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
    Y: Optional[MatrixLike] = None,
) -> np.ndarray:
    """Distances between rows of ``X`` and rows of ``Y`` (default ``X``).

    ``rows`` subsets ``X`` and ``cols`` subsets ``Y``. The result has shape
    ``(len(rows), len(cols))`` and only that array is allocated beyond the
    row views.
    """
    metric = DistanceMetric(metric)
    if not sp.issparse(X):
        X = np.asarray(X, dtype=np.float64)
    other = X if Y is None else (Y if sp.issparse(Y) else np.asarray(Y, dtype=np.float64))
    A = take_rows(X, rows)
    B = take_rows(other, cols)
    if metric is DistanceMetric.COSINE:
        return _cosine_block(A, B)
    return _euclidean_block(A, B)


def row_distances(
    X: MatrixLike,
    i: int,
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
    row_subset: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Distances from row ``i`` to every row of ``row_subset`` (default: all rows)."""
    n_rows = X.shape[0]
    if not 0 <= i < n_rows:
        raise IndexError(f"row {i} out of range for {n_rows} rows")
    if row_subset is not None:
        subset = np.asarray(row_subset, dtype=np.int64)
        if subset.size and (subset.min() < 0 or subset.max() >= n_rows):
            raise IndexError("row_subset contains an out-of-range index")
    else:
        subset = None
    return pairwise_distances(X, [i], subset, metric)[0]


def argsort_ascending(values: Iterable[float]) -> np.ndarray:
    """Stable ascending argsort; ties keep the lower original index first."""
    vector = np.asarray(values, dtype=np.float64)
    if np.any(np.isnan(vector)):
        raise InvalidValue("cannot sort a vector containing NaN")
    return np.argsort(vector, kind="stable")


# ------------------------------------------------------------------ #
# Exact nearest-neighbor scan
# ------------------------------------------------------------------ #

def knn_search(
    X: MatrixLike,
    queries: Sequence[int],
    candidates: Sequence[int],
    k: int,
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
    exclude_self: bool = True,
    Q: Optional[MatrixLike] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact k-NN of each query among ``candidates``, ascending with stable ties.

    Returns ``(indices, distances)`` of shape ``(len(queries), k')`` with
    ``k' = min(k, available)``; indices refer to rows of ``X``. When ``Q`` is
    given, query rows are read from ``Q`` instead of ``X`` and self-exclusion
    is disabled.
    """
    queries = np.asarray(queries, dtype=np.int64)
    candidates = np.asarray(candidates, dtype=np.int64)
    if Q is not None:
        exclude_self = False
    available = candidates.size - (1 if exclude_self else 0)
    k_eff = max(0, min(k, available))

    out_idx = np.empty((queries.size, k_eff), dtype=np.int64)
    out_dist = np.empty((queries.size, k_eff), dtype=np.float64)
    if k_eff == 0:
        return out_idx, out_dist

    for start in range(0, queries.size, _QUERY_CHUNK):
        chunk = queries[start:start + _QUERY_CHUNK]
        if Q is None:
            block = pairwise_distances(X, chunk, candidates, metric)
        else:
            block = pairwise_distances(Q, chunk, candidates, metric, Y=X)
        if exclude_self:
            self_hits = chunk[:, None] == candidates[None, :]
            block[self_hits] = np.inf
        order = np.argsort(block, axis=1, kind="stable")[:, :k_eff]
        out_idx[start:start + chunk.size] = candidates[order]
        out_dist[start:start + chunk.size] = np.take_along_axis(block, order, axis=1)
    return out_idx, out_dist


__all__ = [
    "SparseMatrix",
    "from_dense",
    "to_csr",
    "to_dense",
    "density",
    "take_rows",
    "row_norms",
    "pairwise_distances",
    "row_distances",
    "argsort_ascending",
    "knn_search",
]
