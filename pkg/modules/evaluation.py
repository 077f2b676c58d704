#!/usr/bin/env python3
"""
Ranking quality evaluation

Top-f retraining with a small deterministic logistic-regression probe,
relative F1 against the all-feature baseline and its Simpson-integrated,
range-normalised area.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed
from sklearn.metrics import f1_score
from sklearn.model_selection import KFold, StratifiedKFold
from sklearn.preprocessing import MaxAbsScaler

import config
from core.errors import BaselineDegenerate, InsufficientPoints, InvalidShape, StratificationFailed
from core.sparse_core import argsort_ascending, to_csr
from modules.ranking import RankingResult
from modules.sparsify import spectral_norm

logger = logging.getLogger(__name__)

STRATIFICATION_ATTEMPTS = 3


@dataclass
class PerformanceCurve:
    """Probe F1 per top-f feature count, with the all-feature baseline."""

    f_values: np.ndarray
    f1_values: np.ndarray
    baseline_f1: float

    def __post_init__(self) -> None:
        self.f_values = np.asarray(self.f_values, dtype=np.float64)
        self.f1_values = np.asarray(self.f1_values, dtype=np.float64)
        if self.f_values.shape != self.f1_values.shape:
            raise InvalidShape("f and F1 values must have equal length")
        if np.any(np.diff(self.f_values) <= 0):
            raise InvalidShape("f values must be strictly increasing")

    @property
    def rf1(self) -> np.ndarray:
        if self.baseline_f1 <= 0:
            raise BaselineDegenerate("baseline F1 is zero; relative F1 undefined")
        return self.f1_values / self.baseline_f1

    @property
    def points(self):
        return list(zip(self.f_values.tolist(), self.f1_values.tolist()))

    def to_rows(self) -> List[dict]:
        return [
            {"f": int(f), "f1": float(f1), "rf1": float(r)}
            for f, f1, r in zip(self.f_values, self.f1_values, self.rf1)
        ]


# ---------------------------------------------------------------------- #
# Probe learner
# ---------------------------------------------------------------------- #

class ProbeLogisticRegression:
    """One-vs-rest L2 logistic regression fitted by full-batch gradient descent.

    Objective per label: mean log-loss + ||w||^2 / (2 C n), intercept not
    penalised. Starts from zero weights, so fitting is deterministic.
    """

    def __init__(self, C: float = 1.0, max_epochs: int = config.PROBE_MAX_EPOCHS,
                 tolerance: float = config.PROBE_TOLERANCE):
        self.C = C
        self.max_epochs = max_epochs
        self.tolerance = tolerance
        self.coef_: Optional[np.ndarray] = None
        self.intercept_: Optional[np.ndarray] = None
        self.n_epochs_ = 0

    def _loss(self, Z, Y, W, n):
        data = np.logaddexp(0.0, Z) - Y * Z
        return float(data.sum() / n + (W * W).sum() / (2.0 * self.C * n))

    def fit(self, X, Y) -> "ProbeLogisticRegression":
        X = to_csr(X)
        Y = np.asarray(Y, dtype=np.float64)
        n, n_features = X.shape
        n_labels = Y.shape[1]

        sigma = spectral_norm(X, n_iter=30, seed=0) if X.nnz else 0.0
        lipschitz = 0.25 * (sigma ** 2 + n) / n + 1.0 / (self.C * n)
        step = 1.0 / lipschitz

        W = np.zeros((n_features, n_labels))
        b = np.zeros(n_labels)
        Z = np.zeros((n, n_labels))
        previous = self._loss(Z, Y, W, n)
        for epoch in range(self.max_epochs):
            residual = 1.0 / (1.0 + np.exp(-Z)) - Y
            grad_W = np.asarray(X.T @ residual) / n + W / (self.C * n)
            grad_b = residual.mean(axis=0)
            W -= step * grad_W
            b -= step * grad_b
            Z = np.asarray(X @ W) + b
            current = self._loss(Z, Y, W, n)
            self.n_epochs_ = epoch + 1
            if abs(previous - current) <= self.tolerance * max(abs(previous), 1e-12):
                break
            previous = current

        self.coef_, self.intercept_ = W, b
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(to_csr(X) @ self.coef_) + self.intercept_


def _indicator(classes: np.ndarray, values: np.ndarray) -> np.ndarray:
    return (values[:, None] == classes[None, :]).astype(np.float64)


def _fold_f1(X, targets, train, test, is_mlc: bool, classes) -> float:
    scaler = MaxAbsScaler().fit(X[train])
    X_train, X_test = scaler.transform(X[train]), scaler.transform(X[test])
    probe = ProbeLogisticRegression()

    if is_mlc:
        Y_train = targets[train].toarray()
        probe.fit(X_train, Y_train)
        predicted = (probe.decision_function(X_test) > 0.0).astype(np.int64)
        truth = targets[test].toarray().astype(np.int64)
        return float(f1_score(truth, predicted, average="micro", zero_division=0))

    probe.fit(X_train, _indicator(classes, targets[train]))
    predicted = classes[np.argmax(probe.decision_function(X_test), axis=1)]
    return float(f1_score(targets[test], predicted, average="micro"))


def _splits(targets, folds: int, seed: int, is_mlc: bool):
    n = targets.shape[0]
    if is_mlc:
        return list(KFold(n_splits=folds, shuffle=True, random_state=seed).split(np.zeros(n)))

    classes = np.unique(targets)
    for attempt in range(STRATIFICATION_ATTEMPTS):
        try:
            splits = list(
                StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed + attempt)
                .split(np.zeros(n), targets)
            )
        except ValueError as exc:
            logger.debug("Stratification attempt %d failed: %s", attempt + 1, exc)
            continue
        if all(np.unique(targets[train]).size == classes.size for train, _ in splits):
            return splits
        logger.debug("Stratification attempt %d left a class out of a training fold", attempt + 1)
    raise StratificationFailed(
        f"no {folds}-fold split keeps every class in every training fold"
    )


def probe_f1(X, targets, feature_subset: Optional[Sequence[int]] = None,
             folds: int = config.PROBE_FOLDS, seed: int = config.SEED,
             n_jobs: int = 1) -> float:
    """Mean micro-F1 of the probe over stratified folds, restricted to ``feature_subset``."""
    if folds < 2:
        raise InvalidShape("need at least 2 folds")
    matrix = to_csr(X)
    if feature_subset is not None:
        subset = np.unique(np.asarray(feature_subset, dtype=np.int64))
        if subset.size == 0:
            raise InvalidShape("feature subset is empty")
        if subset.size != matrix.shape[1]:
            matrix = matrix[:, subset]

    is_mlc = sp.issparse(targets)
    if is_mlc:
        targets = to_csr(targets)
        classes = None
    else:
        targets = np.asarray(targets)
        classes = np.unique(targets)

    splits = _splits(targets, folds, seed, is_mlc)
    if n_jobs == 1:
        scores = [_fold_f1(matrix, targets, tr, te, is_mlc, classes) for tr, te in splits]
    else:
        scores = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_fold_f1)(matrix, targets, tr, te, is_mlc, classes) for tr, te in splits
        )
    return float(np.mean(scores))


# ---------------------------------------------------------------------- #
# Curves
# ---------------------------------------------------------------------- #

def _ranking_order(ranking: Union[RankingResult, Sequence[float]]) -> np.ndarray:
    if isinstance(ranking, RankingResult):
        return ranking.ranking
    return argsort_ascending(-np.asarray(ranking, dtype=np.float64))


def default_grid(n_features: int, points: int = 11) -> List[int]:
    """Evenly spread feature counts from 1 to ``n_features``."""
    grid = np.unique(np.round(np.linspace(1, n_features, min(points, n_features))).astype(int))
    return grid.tolist()


def rf1_curve(X, targets, ranking, f_grid: Sequence[int], folds: int = config.PROBE_FOLDS,
              seed: int = config.SEED, n_jobs: int = 1) -> PerformanceCurve:
    """Probe F1 on the top-f ranked features for each f of the grid."""
    matrix = to_csr(X)
    n_features = matrix.shape[1]
    grid = [int(f) for f in f_grid]
    if any(f < 1 or f > n_features for f in grid):
        raise InvalidShape(f"grid values must lie in [1, {n_features}]")

    order = _ranking_order(ranking)
    baseline = probe_f1(matrix, targets, None, folds, seed, n_jobs)
    if baseline <= 0.0:
        raise BaselineDegenerate("probe F1 with all features is zero")

    values = []
    for f in grid:
        if f == n_features:
            values.append(baseline)
            continue
        values.append(probe_f1(matrix, targets, order[:f], folds, seed, n_jobs))
        logger.debug("top-%d features: F1 %.4f", f, values[-1])
    return PerformanceCurve(f_values=np.asarray(grid), f1_values=np.asarray(values),
                            baseline_f1=baseline)


def _simpson_pair(h0: float, h1: float, y0: float, y1: float, y2: float) -> float:
    c0 = 2.0 - h1 / h0
    c1 = (h0 + h1) ** 2 / (h0 * h1)
    c2 = 2.0 - h0 / h1
    return (h0 + h1) * (c0 * y0 + c1 * y1 + c2 * y2) / 6.0


def integrate_simpson(x: Sequence[float], y: Sequence[float]) -> float:
    """Composite Simpson over pairs of intervals; a trailing odd interval uses the trapezoid."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    h = np.diff(xs)
    total = 0.0
    last = 0
    for start in range(0, h.size - 1, 2):
        total += _simpson_pair(h[start], h[start + 1], ys[start], ys[start + 1], ys[start + 2])
        last = start + 2
    if last < h.size:
        total += 0.5 * h[last] * (ys[last] + ys[last + 1])
    return float(total)


def aurf1(curve: PerformanceCurve) -> float:
    """Area under the relative-F1 curve divided by the covered f range."""
    if curve.f_values.size < 3:
        raise InsufficientPoints(f"need at least 3 curve points, got {curve.f_values.size}")
    span = float(curve.f_values[-1] - curve.f_values[0])
    return integrate_simpson(curve.f_values, curve.rf1) / span


def recall_at_k(ranking, informative: Sequence[int], k: int) -> float:
    """Share of the informative features found among the top k."""
    if k < 1:
        raise InvalidShape("k must be at least 1")
    wanted = set(int(j) for j in informative)
    if not wanted:
        return 0.0
    top = set(_ranking_order(ranking)[:k].tolist())
    return len(top & wanted) / float(len(wanted))


__all__ = [
    "PerformanceCurve",
    "ProbeLogisticRegression",
    "probe_f1",
    "default_grid",
    "rf1_curve",
    "integrate_simpson",
    "aurf1",
    "recall_at_k",
]
