#!/usr/bin/env python3
"""
Shared ranking machinery

Result type, instance sampling, neighbor selection and the preparation of the
distance space (sparsified features, optionally embedded) used by both the
multi-class and the multi-label rankers.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from core.dataset import Dataset
from core.logger import StageTimer
from core.params import RankingConfig
from core.sparse_core import SparseMatrix, argsort_ascending
from modules.embed import Embedding, manifold_projection
from modules.sparsify import maybe_sparsify

logger = logging.getLogger(__name__)


@dataclass
class RankingResult:
    """Feature weights over the original features plus run diagnostics."""

    weights: np.ndarray
    variant: str = ""
    task: str = "mcc"
    iterations: int = 0
    dimension: Optional[int] = None
    adaptive_k: List[Tuple[int, int, int]] = field(default_factory=list)
    skipped: int = 0
    clamped: int = 0
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return int(self.weights.size)

    @property
    def ranking(self) -> np.ndarray:
        """Feature indices by descending weight, ties broken by lower index."""
        return argsort_ascending(-self.weights)

    def top_features(self, f: int) -> np.ndarray:
        return self.ranking[:f]

    def to_records(self) -> List[Dict]:
        order = self.ranking
        return [
            {"feature": int(j), "weight": float(self.weights[j]), "rank": position + 1}
            for position, j in enumerate(order)
        ]

    @classmethod
    def from_records(cls, records: Sequence[Dict], n_features: Optional[int] = None) -> "RankingResult":
        size = n_features if n_features is not None else (
            max(int(r["feature"]) for r in records) + 1 if records else 0
        )
        weights = np.zeros(size)
        for record in records:
            weights[int(record["feature"])] = float(record["weight"])
        return cls(weights=weights)


@dataclass
class RankingSpace:
    """Matrices a ranking pass reads: update values and the distance space."""

    features: SparseMatrix
    distance_space: object
    embedding: Optional[Embedding] = None

    @property
    def dimension(self) -> Optional[int]:
        return self.embedding.dimension if self.embedding is not None else None


# ------------------------------------------------------------------ #
# Helpers
# ------------------------------------------------------------------ #

def resolve_jobs(n_jobs: int, serial: bool) -> int:
    """0 means every available core; serial mode forces one."""
    if serial:
        return 1
    if n_jobs and n_jobs > 0:
        return int(n_jobs)
    return max(1, os.cpu_count() or 1)


def draw_samples(n_instances: int, iterations: Optional[int], seed: int) -> np.ndarray:
    """Sampled instance per iteration: uniform with replacement from ``default_rng(seed)``."""
    count = n_instances if iterations is None else int(iterations)
    rng = np.random.default_rng(seed)
    return rng.integers(0, n_instances, size=count)


def split_iterations(samples: np.ndarray, n_jobs: int) -> List[Tuple[int, np.ndarray]]:
    """Contiguous (offset, chunk) pieces of the iteration sequence, one per worker."""
    if n_jobs <= 1 or samples.size < 2:
        return [(0, samples)]
    chunks = np.array_split(samples, min(n_jobs, samples.size))
    pieces, offset = [], 0
    for chunk in chunks:
        pieces.append((offset, chunk))
        offset += chunk.size
    return pieces


def adaptive_k(sorted_distances: Sequence[float]) -> int:
    """Position of the largest gap in an ascending vector (first one on ties)."""
    values = np.asarray(sorted_distances, dtype=np.float64)
    if values.size < 2:
        return 1
    return int(np.argmax(np.diff(values))) + 1


def select_neighbors(candidates: np.ndarray, dists: np.ndarray, k: int,
                     adaptive: bool) -> Tuple[np.ndarray, int]:
    """Nearest candidates; with ``adaptive`` k is the largest gap over all sorted distances.

    ``k`` only bounds the fixed-size neighborhood.
    """
    if candidates.size == 0:
        return candidates, 0
    order = argsort_ascending(dists)
    if adaptive:
        chosen = adaptive_k(dists[order])
    else:
        chosen = min(k, candidates.size)
    return candidates[order[:chosen]], chosen


def dense_rows(X, rows) -> np.ndarray:
    block = X[np.asarray(rows, dtype=np.int64)]
    if sp.issparse(block):
        return block.toarray()
    return np.asarray(block, dtype=np.float64)


def prepare_space(dataset: Dataset, config: RankingConfig,
                  timer: Optional[StageTimer] = None, n_jobs: int = 1) -> RankingSpace:
    """Sparsify when dense enough, then embed the features when requested."""
    timer = timer or StageTimer()
    with timer.stage("sparsify"):
        features = maybe_sparsify(dataset.features, config.sparsify, n_jobs=n_jobs)

    if not config.use_embedding:
        return RankingSpace(features=features, distance_space=features)

    embedding = manifold_projection(
        features, dataset.targets, config.embedding, timer=timer, n_jobs=n_jobs
    )
    return RankingSpace(
        features=features,
        distance_space=embedding.coordinates,
        embedding=embedding,
    )


__all__ = [
    "RankingResult",
    "RankingSpace",
    "resolve_jobs",
    "draw_samples",
    "split_iterations",
    "adaptive_k",
    "select_neighbors",
    "dense_rows",
    "prepare_space",
]
