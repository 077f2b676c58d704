#!/usr/bin/env python3
"""
Multi-label ranking

RReliefF-style update driven by distances between label sets. Target
distances come from the binary label rows or, for the embedded variants,
from a cosine or hyperbolic embedding of the label space.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed

from core.dataset import Dataset
from core.errors import ConfigError, DegenerateGeometry, EmptyNeighborhood, InvalidLabelRow
from core.logger import StageTimer
from core.params import MlcDistance, RankingConfig, UpdateForm
from core.sparse_core import row_distances
from modules.embed import manifold_projection, to_poincare_ball
from modules.ranking import (
    RankingResult,
    RankingSpace,
    dense_rows,
    draw_samples,
    prepare_space,
    resolve_jobs,
    select_neighbors,
    split_iterations,
)

logger = logging.getLogger(__name__)

BALL_EDGE = 1.0 - 1e-7
# Fallback layout dimension when the label space is too degenerate to estimate one
TARGET_FALLBACK_DIM = 2


@dataclass
class MlcUpdateStats:
    """Neighborhood means; ``d_diff`` / ``td_diff`` are scalars or per-feature vectors."""

    t_diff: float
    d_diff: Union[float, np.ndarray]
    td_diff: Union[float, np.ndarray]


# ------------------------------------------------------------------ #
# Target distances
# ------------------------------------------------------------------ #

def _check_binary(rows: np.ndarray) -> None:
    if rows.size and not np.all((rows == 0.0) | (rows == 1.0)):
        raise InvalidLabelRow("binary target distance needs 0/1 label rows")


def lift_to_hyperboloid(points: np.ndarray) -> np.ndarray:
    """Poincare-ball points -> hyperboloid points (time-like coordinate first)."""
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))
    sq = np.einsum("ij,ij->i", p, p)
    norms = np.sqrt(sq)
    outside = norms > BALL_EDGE
    if outside.any():
        p = p.copy()
        p[outside] *= (BALL_EDGE / norms[outside])[:, None]
        sq = np.einsum("ij,ij->i", p, p)
    denominator = 1.0 - sq
    x0 = (1.0 + sq) / denominator
    return np.hstack([x0[:, None], 2.0 * p / denominator[:, None]])


def target_distances(t_i: np.ndarray, others: np.ndarray,
                     tau: MlcDistance) -> Tuple[np.ndarray, int]:
    """Distances from one target row to each row of ``others`` plus the number clamped."""
    tau = MlcDistance.parse(tau)
    t1 = np.asarray(t_i, dtype=np.float64).ravel()
    t2 = np.atleast_2d(np.asarray(others, dtype=np.float64))

    if not tau.embedded:
        _check_binary(t1)
        _check_binary(t2)
        inner = t2 @ t1
        if tau is MlcDistance.F1:
            denominator = t1.sum() + t2.sum(axis=1)
            safe = np.where(denominator > 0, denominator, 1.0)
            return np.where(denominator > 0, 1.0 - 2.0 * inner / safe, 0.0), 0
        if tau is MlcDistance.ACCURACY:
            union = np.count_nonzero(t1[None, :] + t2, axis=1).astype(np.float64)
            safe = np.where(union > 0, union, 1.0)
            return np.where(union > 0, 1.0 - inner / safe, 0.0), 0
        if tau is MlcDistance.SUBSET:
            return np.any(t2 != t1[None, :], axis=1).astype(np.float64), 0
        return np.abs(t2 - t1[None, :]).sum(axis=1) / float(t1.size), 0

    if tau is MlcDistance.COSINE_EMBEDDED:
        norms = np.linalg.norm(t2, axis=1) * np.linalg.norm(t1)
        safe = np.where(norms > 0, norms, 1.0)
        similarity = np.clip((t2 @ t1) / safe, -1.0, 1.0)
        return np.where(norms > 0, 1.0 - similarity, 1.0), 0

    lifted = lift_to_hyperboloid(np.vstack([t1[None, :], t2]))
    head, rest = lifted[0], lifted[1:]
    argument = head[0] * rest[:, 0] - rest[:, 1:] @ head[1:]
    clamped = argument < 1.0
    return np.arccosh(np.maximum(argument, 1.0)), int(clamped.sum())


def target_distance(t1, t2, tau: Union[str, MlcDistance]) -> float:
    """Distance between two target rows (binary rows, or ball coordinates for embedded tags)."""
    values, clamped = target_distances(np.asarray(t1), np.asarray(t2)[None, :], tau)
    if clamped:
        logger.debug("hyperbolic argument below 1 clamped")
    return float(values[0])


# ------------------------------------------------------------------ #
# Update statistics
# ------------------------------------------------------------------ #

def mlc_update_stats(target_dists: Sequence[float], desc_dists) -> MlcUpdateStats:
    """Means over the neighborhood; ``desc_dists`` is 1-D (|K|) or 2-D (|K| x |F|)."""
    t = np.asarray(target_dists, dtype=np.float64).ravel()
    desc = np.asarray(desc_dists, dtype=np.float64)
    if t.size == 0:
        raise EmptyNeighborhood("update statistics need at least one neighbor")
    if desc.shape[0] != t.size:
        raise ValueError(f"{t.size} target distances but {desc.shape[0]} descriptive rows")

    weighted = t * desc if desc.ndim == 1 else t[:, None] * desc
    t_diff = float(t.mean())
    d_diff = desc.mean(axis=0)
    td_diff = weighted.mean(axis=0)
    if desc.ndim == 1:
        d_diff, td_diff = float(d_diff), float(td_diff)
    return MlcUpdateStats(t_diff=t_diff, d_diff=d_diff, td_diff=td_diff)


def mlc_weight_delta(stats: MlcUpdateStats, form: UpdateForm = UpdateForm.PSEUDOCODE):
    """Weight change for one sampled instance.

    pseudocode form: td/t - (d - td)/(1 - t)
    text form:       td/t - (d - t)/(1 - td)

    t = 0 means no neighbor differs in its labels and yields no change;
    a zero denominator in the miss term drops that term.
    """
    t, d, td = stats.t_diff, stats.d_diff, stats.td_diff
    if t == 0.0:
        return np.zeros_like(np.asarray(d, dtype=np.float64)) if np.ndim(d) else 0.0

    hit = np.asarray(td, dtype=np.float64) / t
    if form is UpdateForm.TEXT:
        denominator = 1.0 - np.asarray(td, dtype=np.float64)
        numerator = np.asarray(d, dtype=np.float64) - t
        safe = np.where(denominator != 0.0, denominator, 1.0)
        miss = np.where(denominator != 0.0, numerator / safe, 0.0)
    elif t == 1.0:
        miss = np.zeros_like(hit)
    else:
        miss = (np.asarray(d, dtype=np.float64) - np.asarray(td, dtype=np.float64)) / (1.0 - t)

    delta = hit - miss
    return float(delta) if np.ndim(delta) == 0 else delta


# ------------------------------------------------------------------ #
# Ranking
# ------------------------------------------------------------------ #

def embed_targets(dataset: Dataset, config: RankingConfig, timer: Optional[StageTimer] = None,
                  n_jobs: int = 1) -> np.ndarray:
    """Layout of the label space; ball coordinates for the hyperbolic distance."""
    labels = dataset.labels
    try:
        embedding = manifold_projection(labels, labels, config.embedding, timer=timer,
                                        n_jobs=n_jobs)
    except DegenerateGeometry as exc:
        logger.warning("Label space dimension not estimable (%s); using d=%d",
                       exc, TARGET_FALLBACK_DIM)
        fallback = config.embedding.with_dimension(TARGET_FALLBACK_DIM)
        embedding = manifold_projection(labels, labels, fallback, timer=timer, n_jobs=n_jobs)

    coordinates = embedding.coordinates
    if config.mlc_distance is MlcDistance.HYPERBOLIC_EMBEDDED:
        return to_poincare_ball(coordinates)
    return coordinates


def _target_rows(targets, rows) -> np.ndarray:
    if sp.issparse(targets):
        return targets[np.asarray(rows, dtype=np.int64)].toarray()
    return np.asarray(targets)[np.asarray(rows, dtype=np.int64)]


def _rank_chunk(offset: int, samples: np.ndarray, space: RankingSpace, targets,
                config: RankingConfig):
    n_rows = space.features.shape[0]
    weights = np.zeros(space.features.shape[1])
    history: List[Tuple[int, int, int]] = []
    skipped = 0
    clamped = 0
    everyone = np.arange(n_rows)

    for step, i in enumerate(samples):
        i = int(i)
        dists = row_distances(space.distance_space, i, config.metric)
        candidates = everyone[everyone != i]
        neighbors, k = select_neighbors(
            candidates, dists[candidates], config.k_neighbors, config.adaptive_threshold
        )
        if k == 0:
            skipped += 1
            continue

        t_dists, n_clamped = target_distances(
            _target_rows(targets, [i])[0], _target_rows(targets, neighbors), config.mlc_distance
        )
        clamped += n_clamped
        r_i = dense_rows(space.features, [i])[0]
        desc = np.abs(r_i[None, :] - dense_rows(space.features, neighbors))
        stats = mlc_update_stats(t_dists, desc)
        weights = weights + mlc_weight_delta(stats, config.update_form)
        history.append((offset + step, 0, k))

    return weights, history, skipped, clamped


def rank_mlc(dataset: Dataset, config: RankingConfig,
             timer: Optional[StageTimer] = None) -> RankingResult:
    """Rank features of a multi-label dataset."""
    if not dataset.is_mlc:
        raise ConfigError("rank_mlc needs a multi-label dataset")
    if dataset.n_instances <= config.k_neighbors:
        raise ConfigError(
            f"need more than k={config.k_neighbors} instances, got {dataset.n_instances}"
        )
    if config.abs_mean_update:
        logger.warning("absMean update applies to multi-class ranking only; ignored")

    timer = timer or StageTimer()
    n_jobs = resolve_jobs(config.n_jobs, config.serial)
    space = prepare_space(dataset, config, timer=timer, n_jobs=n_jobs)

    if config.mlc_distance.embedded:
        targets = embed_targets(dataset, config, timer=timer, n_jobs=n_jobs)
    else:
        targets = dataset.labels

    samples = draw_samples(dataset.n_instances, config.iterations, config.seed)
    with timer.stage("rank"):
        pieces = split_iterations(samples, n_jobs)
        if len(pieces) == 1:
            partials = [_rank_chunk(0, samples, space, targets, config)]
        else:
            partials = Parallel(n_jobs=n_jobs, prefer="threads")(
                delayed(_rank_chunk)(offset, chunk, space, targets, config)
                for offset, chunk in pieces
            )

    weights = np.zeros(dataset.n_features)
    history: List[Tuple[int, int, int]] = []
    skipped = clamped = 0
    for partial, part_history, part_skipped, part_clamped in partials:
        weights += partial
        history.extend(part_history)
        skipped += part_skipped
        clamped += part_clamped

    if clamped:
        logger.warning("%d hyperbolic target distances clamped to 0", clamped)
    if skipped:
        logger.warning("%d iterations skipped: no selectable neighbors", skipped)
    logger.info(
        "Ranked %d features over %d iterations (%s, %s)",
        dataset.n_features, samples.size, config.variant_name, config.mlc_distance.value,
    )
    return RankingResult(
        weights=weights,
        variant=config.variant_name,
        task="mlc",
        iterations=int(samples.size),
        dimension=space.dimension,
        adaptive_k=history,
        skipped=skipped,
        clamped=clamped,
        timings=dict(timer.timings),
    )


__all__ = [
    "MlcUpdateStats",
    "lift_to_hyperboloid",
    "target_distances",
    "target_distance",
    "mlc_update_stats",
    "mlc_weight_delta",
    "embed_targets",
    "rank_mlc",
]
