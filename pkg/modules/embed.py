#!/usr/bin/env python3
"""
Manifold embedding

Weighted k-NN graph with per-node smoothing, fuzzy union, force-directed
stochastic layout from a random start, representative cyclic sampling of the
training rows and out-of-sample placement of the remaining rows.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed

from core.errors import (
    ConfigError,
    InsufficientCap,
    InvalidShape,
    InvalidWeight,
    LayoutDiverged,
)
from core.logger import StageTimer
from core.params import EmbeddingConfig
from core.sparse_core import SparseMatrix, knn_search, to_csr
from modules.intrinsic_dim import DimEstimate, estimate_dimension

logger = logging.getLogger(__name__)

BISECTION_ITERATIONS = 128
SMOOTHING_TOLERANCE = 1e-5
INIT_RANGE = 10.0
GRADIENT_CLIP = 4.0


@dataclass
class KnnGraph:
    """Directed k-NN memberships over ``rows`` (local node ids index ``rows``)."""

    adjacency: SparseMatrix
    omegas: np.ndarray
    betas: np.ndarray
    rows: np.ndarray
    degenerate: np.ndarray
    knn_indices: np.ndarray
    knn_dists: np.ndarray

    @property
    def n_degenerate(self) -> int:
        return int(self.degenerate.sum())


@dataclass
class Embedding:
    """Coordinates for every instance (row i of ``coordinates`` is instance i)."""

    coordinates: np.ndarray
    trained_indices: np.ndarray
    dimension: int = 0
    dim_estimate: Optional[DimEstimate] = None
    n_degenerate: int = 0
    timings: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.trained_indices = np.asarray(self.trained_indices, dtype=np.int64)
        if not self.dimension:
            self.dimension = int(self.coordinates.shape[1])


# ------------------------------------------------------------------ #
# Representative cyclic sampling
# ------------------------------------------------------------------ #

def _target_groups(targets) -> List[np.ndarray]:
    """Instance indices grouped per distinct class or distinct label set, in sorted key order."""
    if sp.issparse(targets):
        labels = to_csr(targets)
        keys = [
            tuple(labels.indices[labels.indptr[i]:labels.indptr[i + 1]].tolist())
            for i in range(labels.shape[0])
        ]
        groups = {}
        for i, key in enumerate(keys):
            groups.setdefault(key, []).append(i)
        return [np.asarray(groups[key], dtype=np.int64) for key in sorted(groups)]

    values = np.asarray(targets)
    if values.ndim == 2:
        return _target_groups(sp.csr_matrix(values))
    _, inverse = np.unique(values, return_inverse=True)
    inverse = inverse.ravel()
    return [np.flatnonzero(inverse == g) for g in range(inverse.max() + 1)] if values.size else []


def representative_sample(targets, cap: int, seed: Optional[int] = None) -> np.ndarray:
    """Cycle over distinct target values taking one unused instance from each.

    Exhausted values are skipped; sampling stops after ``min(cap, |I|)``
    instances. Within a value, instances are taken in index order or, with a
    seed, in a seeded random order.
    """
    groups = _target_groups(targets)
    if cap < len(groups):
        raise InsufficientCap(
            f"sample cap {cap} is smaller than the {len(groups)} distinct target values"
        )
    n_total = sum(group.size for group in groups)
    limit = min(cap, n_total)

    rng = np.random.default_rng(seed) if seed is not None else None
    members, passes, order = [], [], []
    for position, group in enumerate(groups):
        if rng is not None:
            group = rng.permutation(group)
        members.append(group)
        passes.append(np.arange(group.size))
        order.append(np.full(group.size, position))
    if not members:
        return np.empty(0, dtype=np.int64)

    members = np.concatenate(members)
    sequence = np.lexsort((np.concatenate(order), np.concatenate(passes)))
    return members[sequence[:limit]]


# ------------------------------------------------------------------ #
# Graph construction
# ------------------------------------------------------------------ #

def smooth_knn_dist(knn_dists: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-row (omega, beta, degenerate) so that sum_j exp(-max(0, d_j - omega)/beta) = log2(k).

    omega is the smallest positive neighbor distance. Rows whose target is
    unreachable (too many neighbors at or below omega) fall back to beta = 1
    and are flagged.
    """
    dists = np.asarray(knn_dists, dtype=np.float64)
    n_rows = dists.shape[0]
    target = np.log2(k)

    positive = np.where(dists > 0.0, dists, np.inf)
    omegas = positive.min(axis=1) if dists.shape[1] else np.full(n_rows, np.inf)
    omegas[~np.isfinite(omegas)] = 0.0

    excess = np.maximum(dists - omegas[:, None], 0.0)
    floor_mass = (excess == 0.0).sum(axis=1)
    reachable = (floor_mass < target) & (dists.shape[1] > target)

    lo = np.zeros(n_rows)
    hi = np.full(n_rows, np.inf)
    mid = np.ones(n_rows)
    done = ~reachable
    for _ in range(BISECTION_ITERATIONS):
        with np.errstate(over="ignore", divide="ignore"):
            psum = np.exp(-excess / mid[:, None]).sum(axis=1)
        done |= np.abs(psum - target) < SMOOTHING_TOLERANCE * 1e-2
        if done.all():
            break
        too_big = (psum > target) & ~done
        too_small = (psum <= target) & ~done
        hi = np.where(too_big, mid, hi)
        lo = np.where(too_small, mid, lo)
        mid = np.where(
            done,
            mid,
            np.where(np.isinf(hi), mid * 2.0, (lo + hi) / 2.0),
        )

    betas = np.where(reachable, mid, 1.0)
    degenerate = ~reachable
    return omegas, betas, degenerate


def membership_weights(knn_dists: np.ndarray, omegas: np.ndarray, betas: np.ndarray) -> np.ndarray:
    excess = np.maximum(np.asarray(knn_dists) - omegas[:, None], 0.0)
    return np.exp(-excess / betas[:, None])


def build_knn_graph(X, config: EmbeddingConfig, rows: Sequence[int],
                    n_jobs: int = 1) -> KnnGraph:
    """Exact k-NN graph over ``rows`` with smoothed edge weights in (0, 1]."""
    rows = np.asarray(rows, dtype=np.int64)
    k = config.k_neighbors
    if rows.size <= k:
        raise InvalidShape(f"need more than k={k} rows to build the graph, got {rows.size}")

    matrix = X if not sp.issparse(X) else to_csr(X)
    if n_jobs == 1 or rows.size <= 1024:
        knn_idx, knn_dists = knn_search(matrix, rows, rows, k, config.metric)
    else:
        chunks = np.array_split(rows, max(1, rows.size // 512))
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(knn_search)(matrix, chunk, rows, k, config.metric) for chunk in chunks
        )
        knn_idx = np.vstack([p[0] for p in parts])
        knn_dists = np.vstack([p[1] for p in parts])

    omegas, betas, degenerate = smooth_knn_dist(knn_dists, k)
    if degenerate.any():
        logger.warning(
            "%d of %d graph nodes use the degenerate smoothing fallback (beta=1)",
            int(degenerate.sum()), rows.size,
        )

    weights = membership_weights(knn_dists, omegas, betas)
    position = np.full(int(max(rows.max(), knn_idx.max(initial=0))) + 1, -1, dtype=np.int64)
    position[rows] = np.arange(rows.size)
    local_cols = position[knn_idx]
    local_rows = np.repeat(np.arange(rows.size), knn_idx.shape[1])

    adjacency = sp.csr_matrix(
        (weights.ravel(), (local_rows, local_cols.ravel())), shape=(rows.size, rows.size)
    )
    adjacency.eliminate_zeros()
    adjacency.sort_indices()
    return KnnGraph(
        adjacency=adjacency,
        omegas=omegas,
        betas=betas,
        rows=rows,
        degenerate=degenerate,
        knn_indices=knn_idx,
        knn_dists=knn_dists,
    )


def fuzzy_union(A) -> SparseMatrix:
    """B = A + A^T - A * A^T (elementwise), symmetric with entries in [0, 1]."""
    matrix = to_csr(A)
    if matrix.shape[0] != matrix.shape[1]:
        raise InvalidShape(f"fuzzy union needs a square matrix, got {matrix.shape}")
    if matrix.nnz and (matrix.data.min() < 0.0 or matrix.data.max() > 1.0):
        raise InvalidWeight("memberships must lie in [0, 1]")

    transpose = matrix.T.tocsr()
    result = (matrix + transpose - matrix.multiply(transpose)).tocsr()
    result.eliminate_zeros()
    result.sort_indices()
    return result


# ------------------------------------------------------------------ #
# Layout optimisation
# ------------------------------------------------------------------ #

def _attract(Y, heads, tails, weights, alpha, a, b):
    diff = Y[heads] - Y[tails]
    dist2 = np.einsum("ij,ij->i", diff, diff)
    coef = np.zeros_like(dist2)
    moving = dist2 > 0.0
    coef[moving] = (
        -2.0 * a * b * np.power(dist2[moving], b - 1.0) / (1.0 + dist2[moving])
    ) * weights[moving]
    grad = np.clip(coef[:, None] * diff, -GRADIENT_CLIP, GRADIENT_CLIP)
    np.add.at(Y, heads, alpha * grad)
    np.add.at(Y, tails, -alpha * grad)


def _repel(Y, heads, others, edge_weights, alpha, b, eta):
    diff = Y[heads] - Y[others]
    dist2 = np.einsum("ij,ij->i", diff, diff)
    coef = b * (1.0 - edge_weights) / ((eta + dist2) * (1.0 + dist2))
    coef[heads == others] = 0.0
    grad = np.clip(coef[:, None] * diff, -GRADIENT_CLIP, GRADIENT_CLIP)
    np.add.at(Y, heads, alpha * grad)


def _lookup(B: SparseMatrix, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    if rows.size == 0 or B.nnz == 0:
        return np.zeros(rows.size)
    return np.asarray(B[rows, cols]).ravel()


def layout(B, config: EmbeddingConfig, n_jobs: int = 1,
           init: Optional[np.ndarray] = None) -> np.ndarray:
    """Optimise coordinates for the symmetric membership graph ``B``.

    Every epoch each edge fires with probability equal to its weight; a fired
    edge pulls both endpoints together and pushes its head away from
    ``negative_samples`` random vertices. Per-coordinate steps are clipped to
    [-4, 4] and the learning rate decays linearly to zero.
    """
    if config.auto_dimension:
        raise ConfigError("layout needs a concrete dimension; resolve d first")
    graph = to_csr(B)
    n_vertices = graph.shape[0]
    d = int(config.d)
    rng = np.random.default_rng(config.seed)

    if init is not None:
        Y = np.array(init, dtype=np.float64, copy=True)
    else:
        Y = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(n_vertices, d))

    coo = graph.tocoo()
    heads = coo.row.astype(np.int64)
    tails = coo.col.astype(np.int64)
    weights = coo.data.astype(np.float64)
    keep = heads != tails
    heads, tails, weights = heads[keep], tails[keep], weights[keep]
    if heads.size == 0 or config.n_epochs == 0:
        return Y

    a, b, eta = config.a, config.b, config.eta
    n_neg = config.negative_samples
    batch = config.batch_size
    parallel = config.parallel and n_jobs != 1

    for epoch in range(config.n_epochs):
        alpha = config.learning_rate * (1.0 - epoch / float(config.n_epochs))
        fired = np.flatnonzero(rng.random(heads.size) < weights)
        fired = fired[rng.permutation(fired.size)]
        negatives = rng.integers(0, n_vertices, size=(fired.size, n_neg))

        batches = [
            (fired[s:s + batch], negatives[s:s + batch]) for s in range(0, fired.size, batch)
        ]

        def _step(edge_ids, neg):
            h, t, w = heads[edge_ids], tails[edge_ids], weights[edge_ids]
            _attract(Y, h, t, w, alpha, a, b)
            if n_neg:
                rep_heads = np.repeat(h, n_neg)
                others = neg.ravel()
                _repel(Y, rep_heads, others, _lookup(graph, rep_heads, others), alpha, b, eta)

        if parallel:
            # Hogwild: concurrent batches may race on shared rows
            Parallel(n_jobs=n_jobs, prefer="threads", require="sharedmem")(
                delayed(_step)(edge_ids, neg) for edge_ids, neg in batches
            )
        else:
            for edge_ids, neg in batches:
                _step(edge_ids, neg)

    if not np.all(np.isfinite(Y)):
        raise LayoutDiverged("layout produced non-finite coordinates")
    return Y


# ------------------------------------------------------------------ #
# Out-of-sample placement and the full projection
# ------------------------------------------------------------------ #

def embed_out_of_sample(E: Embedding, X, new_rows: Sequence[int],
                        config: EmbeddingConfig) -> Embedding:
    """Place each new row at the membership-weighted mean of its nearest trained rows."""
    new_rows = np.asarray(new_rows, dtype=np.int64)
    if new_rows.size == 0:
        return E
    trained = E.trained_indices
    if np.intersect1d(new_rows, trained).size:
        raise InvalidShape("new rows must be disjoint from the trained rows")

    k = min(config.k_neighbors, trained.size)
    knn_idx, knn_dists = knn_search(X, new_rows, trained, k, config.metric, exclude_self=False)
    omegas, betas, _ = smooth_knn_dist(knn_dists, max(k, 2))
    weights = membership_weights(knn_dists, omegas, betas)

    coordinates = E.coordinates.copy()
    neighbor_coords = coordinates[knn_idx]  # (n_new, k, d)

    exact = knn_dists == 0.0
    has_exact = exact.any(axis=1)
    weights = np.where(has_exact[:, None], exact.astype(np.float64), weights)

    totals = weights.sum(axis=1)
    no_weight = totals <= 0.0
    if no_weight.any():
        logger.debug("%d rows without positive-weight neighbors use the plain mean",
                     int(no_weight.sum()))
        weights[no_weight] = 1.0
        totals = weights.sum(axis=1)

    placed = np.einsum("nk,nkd->nd", weights, neighbor_coords) / totals[:, None]
    coordinates[new_rows] = placed
    return Embedding(
        coordinates=coordinates,
        trained_indices=trained,
        dimension=E.dimension,
        dim_estimate=E.dim_estimate,
        n_degenerate=E.n_degenerate,
        timings=dict(E.timings),
    )


def manifold_projection(X, targets, config: EmbeddingConfig,
                        timer: Optional[StageTimer] = None,
                        n_jobs: int = 1) -> Embedding:
    """Sample, estimate d when requested, build the graph, lay it out, place the rest."""
    timer = timer or StageTimer()
    matrix = X if not sp.issparse(X) else to_csr(X)
    n_rows = matrix.shape[0]

    if n_rows > config.sample_cap:
        trained = np.sort(representative_sample(targets, config.sample_cap, config.seed))
    else:
        trained = np.arange(n_rows)

    dim_estimate = None
    if config.auto_dimension:
        with timer.stage("dim"):
            dim_estimate = estimate_dimension(
                matrix, trained, config.dim_tail_fraction, config.dim_multiplier, config.metric
            )
        config = config.with_dimension(dim_estimate.d)

    with timer.stage("embed"):
        d = int(config.d)
        n_degenerate = 0
        if trained.size > 2:
            k = min(config.k_neighbors, trained.size - 1)
            if k != config.k_neighbors:
                logger.warning("k reduced from %d to %d for %d training rows",
                               config.k_neighbors, k, trained.size)
            graph_config = EmbeddingConfig.from_dict({**config.to_dict(), "k_neighbors": k})
            graph = build_knn_graph(matrix, graph_config, trained, n_jobs=n_jobs)
            n_degenerate = graph.n_degenerate
            memberships = fuzzy_union(graph.adjacency)
        else:
            memberships = sp.csr_matrix((trained.size, trained.size))

        trained_coords = layout(memberships, config, n_jobs=n_jobs)
        coordinates = np.full((n_rows, d), np.nan)
        coordinates[trained] = trained_coords
        embedding = Embedding(
            coordinates=coordinates,
            trained_indices=trained,
            dimension=d,
            dim_estimate=dim_estimate,
            n_degenerate=n_degenerate,
        )

        remaining = np.setdiff1d(np.arange(n_rows), trained)
        if remaining.size:
            embedding = embed_out_of_sample(embedding, matrix, remaining, config)

    embedding.timings = dict(timer.timings)
    logger.info(
        "Embedded %d rows into %d dimensions (%d trained)", n_rows, d, trained.size
    )
    return embedding


def to_poincare_ball(coordinates: np.ndarray) -> np.ndarray:
    """Read coordinates as hyperboloid space-like parts and map them into the unit ball."""
    coords = np.asarray(coordinates, dtype=np.float64)
    x0 = np.sqrt(1.0 + np.einsum("ij,ij->i", coords, coords))
    return coords / (1.0 + x0)[:, None]


__all__ = [
    "KnnGraph",
    "Embedding",
    "representative_sample",
    "smooth_knn_dist",
    "membership_weights",
    "build_knn_graph",
    "fuzzy_union",
    "layout",
    "embed_out_of_sample",
    "manifold_projection",
    "to_poincare_ball",
]
