#!/usr/bin/env python3
"""
Multi-class ranking

ReliefF with optional embedded distances, adaptive neighborhood size and the
absMean update. Neighbors are searched in the distance space; weights are
always accumulated over the original feature values.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from core.dataset import Dataset
from core.errors import ConfigError, SingleClass
from core.logger import StageTimer
from core.params import RankingConfig
from core.sparse_core import row_distances
from modules.ranking import (
    RankingResult,
    RankingSpace,
    adaptive_k,
    dense_rows,
    draw_samples,
    prepare_space,
    resolve_jobs,
    select_neighbors,
    split_iterations,
)

logger = logging.getLogger(__name__)


@dataclass
class ClassPriors:
    """Empirical class frequencies over the sorted distinct classes."""

    classes: np.ndarray
    priors: np.ndarray

    @classmethod
    def from_classes(cls, values) -> "ClassPriors":
        classes, counts = np.unique(np.asarray(values), return_counts=True)
        return cls(classes=classes, priors=counts / float(counts.sum()))

    def index(self, c) -> int:
        position = int(np.searchsorted(self.classes, c))
        if position >= self.classes.size or self.classes[position] != c:
            raise KeyError(f"unknown class {c!r}")
        return position

    def __getitem__(self, c) -> float:
        return float(self.priors[self.index(c)])


def _prior_by_index(c: int, c_i: int, priors: np.ndarray) -> float:
    if c == c_i:
        return -1.0
    if priors[c_i] >= 1.0:
        raise SingleClass("prior weight undefined: one class holds every instance")
    return float(priors[c] / (1.0 - priors[c_i]))


def prior_weight(c, c_i, priors: ClassPriors) -> float:
    """-1 for the instance's own class, else P[c] / (1 - P[c_i])."""
    return _prior_by_index(priors.index(c), priors.index(c_i), priors.priors)


def update_abs_mean(w: np.ndarray, r_i: np.ndarray, neighbor_rows: np.ndarray,
                    prior: float) -> np.ndarray:
    """w[j] += |r_i[j] - mean(neighbors)[j]| * prior"""
    rows = np.atleast_2d(neighbor_rows)
    centre = rows.sum(axis=0) / rows.shape[0]
    return w + np.abs(r_i - centre) * prior


def update_classic(w: np.ndarray, r_i: np.ndarray, neighbor_rows: np.ndarray,
                   prior: float) -> np.ndarray:
    """w[j] += mean_n |r_i[j] - n[j]| * prior"""
    rows = np.atleast_2d(neighbor_rows)
    return w + np.abs(r_i - rows).sum(axis=0) / rows.shape[0] * prior


def _rank_chunk(offset: int, samples: np.ndarray, space: RankingSpace,
                class_index: np.ndarray, members: List[np.ndarray],
                priors: np.ndarray, config: RankingConfig):
    weights = np.zeros(space.features.shape[1])
    history: List[Tuple[int, int, int]] = []
    skipped = 0
    update = update_abs_mean if config.abs_mean_update else update_classic

    for step, i in enumerate(samples):
        i = int(i)
        dists = row_distances(space.distance_space, i, config.metric)
        r_i = dense_rows(space.features, [i])[0]
        c_i = int(class_index[i])

        for c, member in enumerate(members):
            candidates = member[member != i]
            if candidates.size == 0:
                skipped += 1
                continue
            neighbors, k = select_neighbors(
                candidates, dists[candidates], config.k_neighbors, config.adaptive_threshold
            )
            prior = _prior_by_index(c, c_i, priors)
            weights = update(weights, r_i, dense_rows(space.features, neighbors), prior)
            history.append((offset + step, c, k))

    return weights, history, skipped


def rank_mcc(dataset: Dataset, config: RankingConfig,
             timer: Optional[StageTimer] = None) -> RankingResult:
    """Rank features of a multi-class dataset; one sampled instance per iteration."""
    if dataset.is_mlc:
        raise ConfigError("rank_mcc needs a multi-class dataset")
    timer = timer or StageTimer()
    n_jobs = resolve_jobs(config.n_jobs, config.serial)

    class_priors = ClassPriors.from_classes(dataset.classes)
    if class_priors.classes.size < 2:
        raise SingleClass("ranking needs at least two classes")
    class_index = np.searchsorted(class_priors.classes, dataset.classes)
    members = [np.flatnonzero(class_index == c) for c in range(class_priors.classes.size)]

    space = prepare_space(dataset, config, timer=timer, n_jobs=n_jobs)
    samples = draw_samples(dataset.n_instances, config.iterations, config.seed)

    with timer.stage("rank"):
        pieces = split_iterations(samples, n_jobs)
        if len(pieces) == 1:
            partials = [
                _rank_chunk(0, samples, space, class_index, members, class_priors.priors, config)
            ]
        else:
            partials = Parallel(n_jobs=n_jobs, prefer="threads")(
                delayed(_rank_chunk)(
                    offset, chunk, space, class_index, members, class_priors.priors, config
                )
                for offset, chunk in pieces
            )

    weights = np.zeros(dataset.n_features)
    history: List[Tuple[int, int, int]] = []
    skipped = 0
    for partial, part_history, part_skipped in partials:
        weights += partial
        history.extend(part_history)
        skipped += part_skipped

    if skipped:
        logger.warning("%d (instance, class) updates skipped: no selectable neighbors", skipped)
    logger.info(
        "Ranked %d features over %d iterations (%s)",
        dataset.n_features, samples.size, config.variant_name,
    )
    return RankingResult(
        weights=weights,
        variant=config.variant_name,
        task="mcc",
        iterations=int(samples.size),
        dimension=space.dimension,
        adaptive_k=history,
        skipped=skipped,
        timings=dict(timer.timings),
    )


__all__ = [
    "ClassPriors",
    "adaptive_k",
    "prior_weight",
    "update_abs_mean",
    "update_classic",
    "rank_mcc",
]
