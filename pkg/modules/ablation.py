#!/usr/bin/env python3
"""
Ablation drivers

Sparsification density over an epsilon grid, the distribution of adaptive
neighborhood sizes, and ranking quality as a function of the iteration budget.
"""

import logging
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

import numpy as np

import config
from core.dataset import Dataset
from core.errors import ConfigError
from core.params import RankingConfig, SparsifyParams
from core.sparse_core import density, to_csr
from modules.evaluation import probe_f1
from modules.rank_mcc import rank_mcc
from modules.rank_mlc import rank_mlc
from modules.sparsify import prms

logger = logging.getLogger(__name__)

ADAPTIVE_K_ITERATIONS = 100


def epsilon_grid(low: float = 1e-4, high: float = 10.0, points: int = 20) -> List[float]:
    """Log-spaced epsilon values from ``low`` to ``high``."""
    if points < 1:
        raise ConfigError("grid needs at least one point")
    if points == 1:
        return [float(low)]
    return np.logspace(np.log10(low), np.log10(high), points).tolist()


def sparsity_sweep(X, epsilons: Sequence[float], seed: int = config.SEED,
                   n_jobs: int = 1) -> List[Dict[str, float]]:
    """(epsilon, output density) per grid value; the input is always sparsified."""
    matrix = to_csr(X)
    input_density = density(matrix)
    rows = []
    for epsilon in epsilons:
        params = SparsifyParams(epsilon=float(epsilon), density_threshold=0.0, seed=seed)
        output = prms(matrix, params, n_jobs=n_jobs)
        rows.append(
            {
                "epsilon": float(epsilon),
                "input_density": input_density,
                "output_density": density(output),
            }
        )
        logger.debug("eps=%.4g density %.6f", epsilon, rows[-1]["output_density"])
    return rows


def adaptive_k_values(dataset: Dataset, ranking_config: RankingConfig,
                      iterations: int = ADAPTIVE_K_ITERATIONS) -> List[Dict[str, int]]:
    """Adaptive k per (iteration, class) over ``iterations`` seeded samples."""
    if dataset.is_mlc:
        raise ConfigError("adaptive k ablation runs on multi-class data")
    run_config = replace(ranking_config, adaptive_threshold=True, iterations=iterations)
    result = rank_mcc(dataset, run_config)
    classes = np.unique(dataset.classes)
    return [
        {"iteration": iteration, "class": classes[c].item(), "k": k}
        for iteration, c, k in result.adaptive_k
    ]


def iteration_budgets(limit: int) -> List[int]:
    """Powers of two up to ``limit``, with ``limit`` itself last."""
    budgets, value = [], 1
    while value < limit:
        budgets.append(value)
        value *= 2
    budgets.append(limit)
    return budgets


def iteration_curve(dataset: Dataset, variants: Sequence[str], budgets: Sequence[int],
                    top_f: int, base_config: Optional[RankingConfig] = None,
                    folds: int = config.PROBE_FOLDS, seed: int = config.SEED,
                    n_jobs: int = 1) -> List[Dict]:
    """Probe F1 of the top ``top_f`` features after each iteration budget, per variant."""
    base = base_config or RankingConfig()
    rank = rank_mlc if dataset.is_mlc else rank_mcc
    top_f = min(top_f, dataset.n_features)
    rows = []
    for variant in variants:
        for budget in budgets:
            run_config = RankingConfig.for_variant(
                variant,
                **{
                    key: getattr(base, key)
                    for key in ("k_neighbors", "metric", "mlc_distance", "update_form",
                                "embedding", "sparsify", "seed", "n_jobs", "serial")
                },
                iterations=int(budget),
            )
            result = rank(dataset, run_config)
            score = probe_f1(dataset.features, dataset.targets, result.top_features(top_f),
                             folds, seed, n_jobs)
            rows.append({"variant": variant, "iterations": int(budget), "f1": score})
            logger.info("%s after %d iterations: F1 %.4f", variant, budget, score)
    return rows


__all__ = [
    "ADAPTIVE_K_ITERATIONS",
    "epsilon_grid",
    "sparsity_sweep",
    "adaptive_k_values",
    "iteration_budgets",
    "iteration_curve",
]
