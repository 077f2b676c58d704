"""Tests for multi-label target distances, update statistics and ranking."""

import numpy as np
import pytest
import scipy.sparse as sp

from core.dataset import Dataset
from core.errors import ConfigError, EmptyNeighborhood, InvalidLabelRow
from core.params import EmbeddingConfig, MlcDistance, RankingConfig, SparsifyParams, UpdateForm
from modules.rank_mlc import (
    MlcUpdateStats,
    embed_targets,
    lift_to_hyperboloid,
    mlc_update_stats,
    mlc_weight_delta,
    rank_mlc,
    target_distance,
    target_distances,
)
from modules.evaluation import recall_at_k
from modules.ranking import draw_samples
from tests.conftest import informative_mlc

NO_SPARSIFY = SparsifyParams(density_threshold=1.0)
BINARY = ["f1", "accuracy", "subset", "hamming"]


def loop_oracle(X, Y, samples, k):
    """Hamming-distance multi-label update written out loop by loop."""
    n = X.shape[0]
    w = np.zeros(X.shape[1])
    for i in samples:
        others = np.array([j for j in range(n) if j != i])
        d = np.sqrt(((X[others] - X[i]) ** 2).sum(axis=1))
        neighbors = others[np.argsort(d, kind="stable")[:k]]
        t = np.array([np.abs(Y[i] - Y[j]).sum() / Y.shape[1] for j in neighbors])
        desc = np.abs(X[i] - X[neighbors])
        t_diff = t.mean()
        d_diff = desc.mean(axis=0)
        td_diff = (t[:, None] * desc).mean(axis=0)
        if t_diff == 0.0:
            continue
        miss = 0.0 if t_diff == 1.0 else (d_diff - td_diff) / (1.0 - t_diff)
        w = w + (td_diff / t_diff - miss)
    return w


class TestTargetDistance:
    """Label-set distances."""

    def test_f1_identical(self):
        assert target_distance([1, 0, 1], [1, 0, 1], "f1") == 0.0

    def test_hamming(self):
        assert target_distance([1, 0, 1], [0, 0, 1], "hamming") == pytest.approx(1.0 / 3.0)

    def test_accuracy_disjoint(self):
        assert target_distance([1, 0], [0, 1], "accuracy") == 1.0

    def test_subset(self):
        assert target_distance([1, 0, 1], [1, 0, 1], "subset") == 0.0
        assert target_distance([1, 0, 1], [1, 1, 1], "subset") == 1.0

    @pytest.mark.parametrize("tau", ["f1", "accuracy"])
    def test_empty_sets(self, tau):
        assert target_distance([0, 0, 0], [0, 0, 0], tau) == 0.0

    def test_accuracy_matches_jaccard(self, rng):
        for _ in range(200):
            a, b = rng.integers(0, 2, size=(2, 8))
            left, right = set(np.flatnonzero(a)), set(np.flatnonzero(b))
            union = left | right
            expected = 1.0 - len(left & right) / len(union) if union else 0.0
            assert target_distance(a, b, "accuracy") == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("tau", BINARY)
    def test_symmetric_and_bounded(self, tau, rng):
        rows = rng.integers(0, 2, size=(30, 6)).astype(float)
        for a in rows[:10]:
            forward, _ = target_distances(a, rows, tau)
            assert np.all((forward >= 0.0) & (forward <= 1.0))
            for b, value in zip(rows, forward):
                assert target_distance(b, a, tau) == pytest.approx(value, abs=1e-15)

    def test_non_binary_rejected(self):
        with pytest.raises(InvalidLabelRow):
            target_distance([0.5, 1.0], [1.0, 0.0], "hamming")

    def test_cosine(self):
        assert target_distance([1.0, 0.0], [0.0, 1.0], "cosine") == pytest.approx(1.0)
        assert target_distance([1.0, 1.0], [2.0, 2.0], "cosine") == pytest.approx(0.0, abs=1e-12)

    def test_hyperbolic_from_origin(self):
        """Distance from the centre of the ball to (0.5, 0) is ln 3."""
        assert target_distance([0.0, 0.0], [0.5, 0.0], "hyperbolic") == pytest.approx(np.log(3.0))

    def test_hyperbolic_clamps_identical_points(self):
        p = np.array([0.3, -0.2])
        values, _ = target_distances(p, np.vstack([p, p]), MlcDistance.HYPERBOLIC_EMBEDDED)
        np.testing.assert_allclose(values, 0.0, atol=1e-6)

    def test_lift_lands_on_hyperboloid(self, rng):
        points = rng.uniform(-0.5, 0.5, size=(20, 3))
        lifted = lift_to_hyperboloid(points)
        form = lifted[:, 0] ** 2 - (lifted[:, 1:] ** 2).sum(axis=1)
        np.testing.assert_allclose(form, 1.0, rtol=1e-10)


class TestUpdateStats:
    def test_zero_target_distances(self):
        stats = mlc_update_stats([0.0, 0.0], [0.3, 0.9])
        assert stats.t_diff == 0.0
        assert stats.td_diff == 0.0

    def test_single_neighbor(self):
        stats = mlc_update_stats([0.25], [0.8])
        assert (stats.t_diff, stats.d_diff, stats.td_diff) == (0.25, 0.8, 0.25 * 0.8)

    def test_matches_direct_sums(self, rng):
        t, d = rng.uniform(size=7), rng.uniform(size=7)
        stats = mlc_update_stats(t, d)
        assert stats.t_diff == pytest.approx(sum(t) / 7, rel=1e-12)
        assert stats.d_diff == pytest.approx(sum(d) / 7, rel=1e-12)
        assert stats.td_diff == pytest.approx(sum(a * b for a, b in zip(t, d)) / 7, rel=1e-12)

    def test_per_feature_rows(self, rng):
        t, desc = rng.uniform(size=4), rng.uniform(size=(4, 3))
        stats = mlc_update_stats(t, desc)
        np.testing.assert_allclose(stats.d_diff, desc.mean(axis=0))
        np.testing.assert_allclose(stats.td_diff, (t[:, None] * desc).mean(axis=0))
        assert np.all(stats.td_diff <= t.max() * desc.max(axis=0))

    def test_empty(self):
        with pytest.raises(EmptyNeighborhood):
            mlc_update_stats([], [])


class TestWeightDelta:
    def test_independence_gives_zero(self):
        assert mlc_weight_delta(MlcUpdateStats(0.5, 0.4, 0.2)) == pytest.approx(0.0, abs=1e-15)

    def test_aligned_distances_rewarded(self):
        assert mlc_weight_delta(MlcUpdateStats(0.5, 0.4, 0.4)) == pytest.approx(0.8)

    def test_no_label_difference(self):
        assert mlc_weight_delta(MlcUpdateStats(0.0, 0.7, 0.0)) == 0.0

    def test_all_labels_differ_drops_miss_term(self):
        assert mlc_weight_delta(MlcUpdateStats(1.0, 0.6, 0.6)) == pytest.approx(0.6)

    def test_text_form(self):
        delta = mlc_weight_delta(MlcUpdateStats(0.5, 0.4, 0.2), UpdateForm.TEXT)
        assert delta == pytest.approx(0.4 - (0.4 - 0.5) / 0.8)

    def test_fixed_point_per_feature(self, rng):
        for _ in range(50):
            t = rng.uniform(0.05, 0.95)
            d = rng.uniform(size=5)
            delta = mlc_weight_delta(MlcUpdateStats(t, d, t * d))
            np.testing.assert_allclose(delta, 0.0, atol=1e-12)


class TestRankMlc:
    def test_identical_label_sets(self, rng):
        X = rng.uniform(size=(30, 4))
        Y = np.tile([1.0, 0.0, 1.0], (30, 1))
        dataset = Dataset(sp.csr_matrix(X), "mlc", labels=sp.csr_matrix(Y))
        result = rank_mlc(dataset, RankingConfig(k_neighbors=5, sparsify=NO_SPARSIFY))
        assert np.all(result.weights == 0.0)

    def test_matches_loop_oracle(self, small_mlc):
        config = RankingConfig(iterations=25, k_neighbors=5, seed=3, sparsify=NO_SPARSIFY)
        result = rank_mlc(small_mlc, config)
        expected = loop_oracle(small_mlc.features.toarray(), small_mlc.labels.toarray(),
                                     draw_samples(40, 25, 3), 5)
        np.testing.assert_allclose(result.weights, expected, rtol=1e-12, atol=1e-12)
        assert result.task == "mlc"

    def test_deterministic(self, small_mlc):
        config = RankingConfig(k_neighbors=5, mlc_distance="f1", adaptive_threshold=True, seed=9)
        np.testing.assert_array_equal(rank_mlc(small_mlc, config).weights,
                                      rank_mlc(small_mlc, config).weights)

    @pytest.mark.parametrize("tau", BINARY)
    def test_binary_distances_finite(self, small_mlc, tau):
        result = rank_mlc(small_mlc, RankingConfig(k_neighbors=5, mlc_distance=tau))
        assert result.weights.shape == (6,)
        assert np.all(np.isfinite(result.weights))

    def test_text_form_finite(self, small_mlc):
        config = RankingConfig(k_neighbors=5, update_form="text")
        assert np.all(np.isfinite(rank_mlc(small_mlc, config).weights))

    @pytest.mark.parametrize("tau", ["cosine", "hyperbolic"])
    def test_embedded_targets(self, small_mlc, tau):
        config = RankingConfig(
            k_neighbors=5,
            mlc_distance=tau,
            embedding=EmbeddingConfig(d=2, k_neighbors=5, n_epochs=10),
        )
        result = rank_mlc(small_mlc, config)
        assert np.all(np.isfinite(result.weights))

    def test_target_dimension_fallback(self):
        """Two alternating label sets leave the dimension undefined; d=2 is used."""
        X = np.random.default_rng(1).uniform(size=(30, 3))
        Y = np.array([[1.0, 0.0], [0.0, 1.0]] * 15)
        dataset = Dataset(sp.csr_matrix(X), "mlc", labels=sp.csr_matrix(Y))
        config = RankingConfig(mlc_distance="cosine",
                               embedding=EmbeddingConfig(k_neighbors=5, n_epochs=5))
        assert embed_targets(dataset, config).shape == (30, 2)

    def test_rejects_multiclass(self, small_mcc):
        with pytest.raises(ConfigError):
            rank_mlc(small_mcc, RankingConfig())

    def test_needs_more_rows_than_k(self, small_mlc):
        with pytest.raises(ConfigError):
            rank_mlc(small_mlc, RankingConfig(k_neighbors=40))

    @pytest.mark.slow
    def test_informative_features_ranked_high(self):
        """Each label thresholds its own feature; all three land in the top 10."""
        recalls = []
        for seed in range(5):
            dataset, informative = informative_mlc(n=300, n_features=50, n_labels=3, seed=seed)
            result = rank_mlc(dataset, RankingConfig(seed=seed, sparsify=NO_SPARSIFY))
            recalls.append(recall_at_k(result, informative, 10))
        assert np.median(recalls) == 1.0
