#!/usr/bin/env python3
"""
Latent dimension estimation from two nearest neighbors

Only neighbors at strictly positive distance count, so duplicated rows (common
in multi-label target spaces) never produce infinite or undefined ratios.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

import config
from core.errors import DegenerateGeometry, InvalidShape
from core.params import DistanceMetric
from core.sparse_core import pairwise_distances

logger = logging.getLogger(__name__)

_QUERY_CHUNK = 512


@dataclass
class DimEstimate:
    """Rounded dimension, fitted slope and the data behind the fit."""

    d: int
    slope: float
    mu: np.ndarray
    empirical_cdf: np.ndarray
    n_used: int = 0

    def fit_points(self):
        """(log mu, -log(1 - EMP)) pairs in ascending mu order, for plotting."""
        order = np.argsort(self.mu, kind="stable")
        x = np.log(self.mu[order])
        y = -np.log1p(-self.empirical_cdf[order])
        return x, y


def empirical_cdf(values: Sequence[float]) -> np.ndarray:
    """EMP(x) = share of entries strictly smaller than x, evaluated at every entry."""
    vector = np.asarray(values, dtype=np.float64)
    if vector.size == 0:
        return vector.copy()
    ordered = np.sort(vector)
    return np.searchsorted(ordered, vector, side="left") / float(vector.size)


def _round_half_away(value: float) -> int:
    return int(np.sign(value) * np.floor(abs(value) + 0.5))


def two_positive_neighbors(X, sample_indices: Sequence[int],
                           metric: DistanceMetric = DistanceMetric.EUCLIDEAN) -> np.ndarray:
    """(r1, r2) per sampled row among the sample; NaN where fewer than two exist."""
    sample = np.asarray(sample_indices, dtype=np.int64)
    radii = np.full((sample.size, 2), np.nan)
    for start in range(0, sample.size, _QUERY_CHUNK):
        chunk = sample[start:start + _QUERY_CHUNK]
        block = pairwise_distances(X, chunk, sample, metric)
        block[block <= 0.0] = np.inf
        if block.shape[1] >= 2:
            two = np.partition(block, 1, axis=1)[:, :2]
        else:
            two = np.full((chunk.size, 2), np.inf)
        two[~np.isfinite(two)] = np.nan
        radii[start:start + chunk.size] = two
    return radii


def estimate_dimension(
    X,
    sample_indices: Sequence[int],
    tail_fraction: float = config.DIM_TAIL_FRACTION,
    multiplier: float = config.DIM_MULTIPLIER,
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN,
) -> DimEstimate:
    """Estimate the latent dimension of the rows ``sample_indices`` of ``X``.

    Ratios mu = r2 / r1 of the two smallest positive distances are fitted
    with a line through the origin of -log(1 - EMP(mu)) against log(mu);
    the largest ``tail_fraction`` of mu values are left out of the fit.
    """
    sample = np.asarray(sample_indices, dtype=np.int64)
    if sample.size < 3:
        raise InvalidShape(f"need at least 3 sampled rows, got {sample.size}")

    radii = two_positive_neighbors(X, sample, metric)
    valid = np.all(np.isfinite(radii), axis=1)
    n_invalid = int((~valid).sum())
    if n_invalid * 2 > sample.size:
        raise DegenerateGeometry(
            f"{n_invalid} of {sample.size} samples lack two neighbors at positive distance"
        )
    if n_invalid:
        logger.warning("%d samples without two positive-distance neighbors ignored", n_invalid)

    mu = radii[valid, 1] / radii[valid, 0]
    emp = empirical_cdf(mu)

    order = np.argsort(mu, kind="stable")
    n_fit = int(np.floor(mu.size * (1.0 - tail_fraction)))
    fit = order[:max(n_fit, 1)]
    # EMP of the global maximum never reaches 1, guard anyway
    fit = fit[emp[fit] < 1.0]
    x = np.log(mu[fit])
    y = -np.log1p(-emp[fit])
    denominator = float(x @ x)
    if denominator <= 0.0:
        raise DegenerateGeometry("all distance ratios equal 1; slope undefined")

    slope = float(x @ y) / denominator
    d = _round_half_away(slope * multiplier)
    if d < 1:
        logger.warning("Estimated dimension %.3f rounds below 1, clamped to 1", slope * multiplier)
        d = 1

    logger.info("Latent dimension %d (slope %.4f over %d ratios)", d, slope, fit.size)
    return DimEstimate(d=d, slope=slope, mu=mu, empirical_cdf=emp, n_used=int(fit.size))


__all__ = ["DimEstimate", "empirical_cdf", "estimate_dimension", "two_positive_neighbors"]
