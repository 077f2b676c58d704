#!/usr/bin/env python3
"""
Probabilistic Matrix Sparsification (PrMS)

Entries larger than eps/sqrt(n) are kept, smaller ones survive with probability
proportional to their magnitude and are clamped to +-eps/sqrt(n), so every
entry is preserved in expectation. ``n`` is the order of the symmetrised
matrix [[0, B], [B^T, 0]], i.e. rows + columns of B.
"""

import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed

from core.errors import DegenerateInput
from core.params import SparsifyParams
from core.sparse_core import SparseMatrix, density, to_csr

logger = logging.getLogger(__name__)

_ROW_BLOCK = 4096


def estimate_epsilon(B) -> float:
    """Max absolute row/column sum of the symmetrised matrix over its order."""
    matrix = to_csr(B)
    m, n_cols = matrix.shape
    if matrix.nnz == 0:
        raise DegenerateInput("cannot estimate epsilon for an all-zero matrix")

    magnitude = abs(matrix)
    row_sums = np.asarray(magnitude.sum(axis=1)).ravel()
    col_sums = np.asarray(magnitude.sum(axis=0)).ravel()
    norm_inf = max(row_sums.max(initial=0.0), col_sums.max(initial=0.0))
    return float(norm_inf) / float(m + n_cols)


def _uniforms(seed: int, offset: int, size: int) -> np.ndarray:
    """Uniform draws number ``offset .. offset+size`` of the seeded stream."""
    bit_generator = np.random.PCG64(seed)
    if offset:
        bit_generator.advance(offset)
    return np.random.Generator(bit_generator).random(size)


def _sparsify_values(values: np.ndarray, cutoff: float, draws: np.ndarray) -> np.ndarray:
    magnitude = np.abs(values)
    small = magnitude <= cutoff
    out = values.copy()
    keep_small = draws[small] < magnitude[small] / cutoff
    out[small] = np.where(keep_small, np.sign(values[small]) * cutoff, 0.0)
    return out


def prms(B, params: SparsifyParams, n_jobs: int = 1) -> SparseMatrix:
    """Sparsify ``B`` entrywise; same shape, unbiased, deterministic per seed.

    The k-th stored entry consumes the k-th draw of ``PCG64(seed)``, so
    row blocks processed in parallel reproduce the serial output exactly.
    """
    matrix = to_csr(B)
    epsilon = params.epsilon if params.epsilon is not None else estimate_epsilon(matrix)
    order = matrix.shape[0] + matrix.shape[1]
    cutoff = epsilon / np.sqrt(order)

    if n_jobs == 1 or matrix.shape[0] <= _ROW_BLOCK:
        draws = _uniforms(params.seed, 0, matrix.nnz)
        data = _sparsify_values(matrix.data, cutoff, draws)
    else:
        starts = list(range(0, matrix.shape[0], _ROW_BLOCK))

        def _block(start):
            lo = matrix.indptr[start]
            hi = matrix.indptr[min(start + _ROW_BLOCK, matrix.shape[0])]
            draws = _uniforms(params.seed, int(lo), int(hi - lo))
            return _sparsify_values(matrix.data[lo:hi], cutoff, draws)

        blocks = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(_block)(s) for s in starts)
        data = np.concatenate(blocks) if blocks else matrix.data.copy()

    result = sp.csr_matrix((data, matrix.indices.copy(), matrix.indptr.copy()), shape=matrix.shape)
    result.eliminate_zeros()
    logger.debug(
        "PrMS: eps=%.6g cutoff=%.6g nnz %d -> %d", epsilon, cutoff, matrix.nnz, result.nnz
    )
    return result


def maybe_sparsify(X, params: SparsifyParams, n_jobs: int = 1) -> SparseMatrix:
    """Sparsify only when the input is denser than ``params.density_threshold``."""
    matrix = to_csr(X)
    current = density(matrix)
    if current <= params.density_threshold:
        logger.debug("Density %.6f below threshold %.3f, input kept", current,
                     params.density_threshold)
        return matrix

    result = prms(matrix, params, n_jobs=n_jobs)
    logger.info(
        "Sparsified input: density %.6f -> %.6f", current, density(result)
    )
    return result


def spectral_norm(A, n_iter: int = 100, seed: Optional[int] = 0) -> float:
    """Largest singular value by power iteration on A^T A."""
    matrix = A if sp.issparse(A) else np.asarray(A, dtype=np.float64)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(matrix.shape[1])
    norm = np.linalg.norm(x)
    if norm == 0:
        return 0.0
    x /= norm
    for _ in range(n_iter):
        y = matrix.T @ (matrix @ x)
        y = np.asarray(y).ravel()
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        x = y / norm
    return float(np.linalg.norm(np.asarray(matrix @ x).ravel()))


__all__ = ["estimate_epsilon", "prms", "maybe_sparsify", "spectral_norm"]
