"""Tests for multi-class ranking."""

import numpy as np
import pytest
import scipy.sparse as sp

from core.dataset import Dataset
from core.errors import ConfigError, SingleClass
from core.params import EmbeddingConfig, RankingConfig, SparsifyParams
from modules.rank_mcc import (
    ClassPriors,
    adaptive_k,
    prior_weight,
    rank_mcc,
    update_abs_mean,
    update_classic,
)
from modules.evaluation import recall_at_k
from modules.ranking import draw_samples, select_neighbors
from modules.sparsify import maybe_sparsify
from tests.conftest import informative_mcc

NO_SPARSIFY = SparsifyParams(density_threshold=1.0)


def brute_force_relieff(X, y, samples, k):
    """Straight ReliefF over dense rows, classes in sorted order, self excluded."""
    classes, counts = np.unique(y, return_counts=True)
    priors = counts / counts.sum()
    everyone = np.arange(X.shape[0])
    w = np.zeros(X.shape[1])
    for i in samples:
        own = int(np.searchsorted(classes, y[i]))
        for c, value in enumerate(classes):
            candidates = everyone[(y == value) & (everyone != i)]
            if candidates.size == 0:
                continue
            d = np.sqrt(((X[candidates] - X[i]) ** 2).sum(axis=1))
            rows = X[candidates[np.argsort(d, kind="stable")[:k]]]
            prior = -1.0 if c == own else priors[c] / (1.0 - priors[own])
            w = w + np.abs(X[i] - rows).sum(axis=0) / rows.shape[0] * prior
    return w


class TestAdaptiveK:
    """Cut before the largest gap."""

    def test_clear_gap(self):
        assert adaptive_k([0.1, 0.11, 0.12, 0.9, 0.95]) == 3

    def test_uniform_gaps_take_first(self):
        assert adaptive_k([1.0, 2.0, 3.0, 4.0]) == 1

    def test_short_vector(self):
        assert adaptive_k([0.5]) == 1

    def test_matches_argmax_oracle(self, rng):
        for _ in range(1000):
            values = np.sort(rng.exponential(size=rng.integers(2, 30)))
            gaps = [values[i + 1] - values[i] for i in range(values.size - 1)]
            assert adaptive_k(values) == gaps.index(max(gaps)) + 1

    def test_gap_beyond_configured_k(self):
        dists = np.array([0.10, 0.11, 0.12, 0.13, 0.14, 5.0, 5.1])
        neighbors, k = select_neighbors(np.arange(7), dists, 2, adaptive=True)
        assert k == 5
        np.testing.assert_array_equal(neighbors, [0, 1, 2, 3, 4])

    def test_unsorted_candidates(self):
        candidates = np.array([10, 11, 12, 13])
        neighbors, k = select_neighbors(candidates, np.array([4.0, 0.1, 4.2, 0.2]), 1,
                                        adaptive=True)
        assert k == 2
        np.testing.assert_array_equal(neighbors, [11, 13])

    def test_fixed_k_capped_by_candidates(self):
        neighbors, k = select_neighbors(np.arange(3), np.array([0.3, 0.1, 0.2]), 5,
                                        adaptive=False)
        assert k == 3
        np.testing.assert_array_equal(neighbors, [1, 2, 0])


class TestPriorWeight:
    def test_own_class(self):
        priors = ClassPriors.from_classes(["A", "B"])
        assert prior_weight("A", "A", priors) == -1.0

    def test_balanced(self):
        assert prior_weight("B", "A", ClassPriors.from_classes(["A", "B"])) == 1.0

    def test_unbalanced(self):
        priors = ClassPriors.from_classes(["A", "B", "C", "C"])
        assert prior_weight("C", "A", priors) == pytest.approx(2.0 / 3.0)

    def test_weights_balance_out(self):
        """Hit and miss priors sum to zero for every sampled class."""
        priors = ClassPriors.from_classes([0, 0, 1, 2, 2, 2, 3])
        for c_i in priors.classes:
            total = sum(prior_weight(c, c_i, priors) for c in priors.classes)
            assert total == pytest.approx(0.0, abs=1e-12)

    def test_single_class(self):
        priors = ClassPriors(classes=np.array(["A", "B"]), priors=np.array([1.0, 0.0]))
        with pytest.raises(SingleClass):
            prior_weight("B", "A", priors)

    def test_unknown_class(self):
        with pytest.raises(KeyError):
            ClassPriors.from_classes([1, 2])[3]


class TestUpdates:
    def test_abs_mean_zero_at_centre(self):
        rows = np.array([[0.0, 2.0], [2.0, 4.0]])
        w = update_abs_mean(np.zeros(2), np.array([1.0, 3.0]), rows, 1.0)
        np.testing.assert_array_equal(w, [0.0, 0.0])

    def test_single_neighbor_forms_agree(self, rng):
        r, n = rng.normal(size=4), rng.normal(size=(1, 4))
        np.testing.assert_array_equal(
            update_abs_mean(np.zeros(4), r, n, 0.7), update_classic(np.zeros(4), r, n, 0.7)
        )

    def test_abs_mean_contracts(self, rng):
        """|r - mean(n)| never exceeds mean |r - n| over random neighborhoods."""
        for _ in range(1000):
            n_features = int(rng.integers(1, 12))
            r = rng.normal(size=n_features)
            rows = rng.normal(size=(int(rng.integers(1, 16)), n_features))
            abs_mean = update_abs_mean(np.zeros(n_features), r, rows, 1.0)
            classic = update_classic(np.zeros(n_features), r, rows, 1.0)
            np.testing.assert_allclose(abs_mean, np.abs(r - rows.mean(axis=0)),
                                       rtol=0, atol=1e-12)
            assert np.all(abs_mean <= classic + 1e-12)

    def test_classic_matches_formula(self, rng):
        r, rows = rng.normal(size=5), rng.normal(size=(4, 5))
        expected = np.array([np.mean([abs(r[j] - n[j]) for n in rows]) for j in range(5)]) * -1.0
        np.testing.assert_allclose(update_classic(np.zeros(5), r, rows, -1.0), expected, rtol=1e-12)


class TestRankMcc:
    def test_matches_brute_force(self, small_mcc):
        config = RankingConfig(iterations=30, k_neighbors=3, seed=4, sparsify=NO_SPARSIFY)
        result = rank_mcc(small_mcc, config)
        X = small_mcc.features.toarray()
        expected = brute_force_relieff(X, small_mcc.classes, draw_samples(20, 30, 4), 3)
        np.testing.assert_allclose(result.weights, expected, rtol=1e-12, atol=1e-14)
        assert result.iterations == 30
        assert result.variant == "relieff"

    def test_constant_features(self):
        dataset = Dataset(sp.csr_matrix(np.ones((12, 4))), "mcc", classes=np.arange(12) % 2)
        result = rank_mcc(dataset, RankingConfig(k_neighbors=3, sparsify=NO_SPARSIFY))
        assert np.all(result.weights == 0.0)

    def test_deterministic(self, small_mcc):
        config = RankingConfig(k_neighbors=3, adaptive_threshold=True, abs_mean_update=True, seed=2)
        first = rank_mcc(small_mcc, config).weights
        second = rank_mcc(small_mcc, config).weights
        np.testing.assert_array_equal(first, second)

    def test_parallel_matches_serial(self, small_mcc):
        serial = rank_mcc(small_mcc, RankingConfig(iterations=40, k_neighbors=3, seed=1))
        parallel = rank_mcc(
            small_mcc, RankingConfig(iterations=40, k_neighbors=3, seed=1, serial=False, n_jobs=3)
        )
        np.testing.assert_allclose(parallel.weights, serial.weights, rtol=1e-9, atol=1e-12)
        assert sorted(parallel.adaptive_k) == sorted(serial.adaptive_k)

    def test_column_permutation(self, small_mcc):
        perm = np.array([3, 0, 4, 1, 2])
        shuffled = Dataset(small_mcc.features[:, perm], "mcc", classes=small_mcc.classes)
        config = RankingConfig(k_neighbors=3, seed=6, sparsify=NO_SPARSIFY)
        np.testing.assert_allclose(
            rank_mcc(shuffled, config).weights, rank_mcc(small_mcc, config).weights[perm],
            rtol=1e-10, atol=1e-12,
        )

    def test_adaptive_k_recorded(self, small_mcc):
        result = rank_mcc(small_mcc, RankingConfig(iterations=10, k_neighbors=4,
                                                   adaptive_threshold=True))
        assert len(result.adaptive_k) == 10 * 3
        # classes hold 8, 8 and 4 rows, so at most 8 candidates and 7 gaps
        assert all(1 <= k <= 7 for _, _, k in result.adaptive_k)

    def test_lonely_class_skipped(self):
        X = np.random.default_rng(0).normal(size=(10, 3))
        dataset = Dataset(sp.csr_matrix(X), "mcc", classes=[0] * 9 + [1])
        result = rank_mcc(dataset, RankingConfig(iterations=50, k_neighbors=3, seed=0))
        assert result.skipped == int((draw_samples(10, 50, 0) == 9).sum())
        assert np.all(np.isfinite(result.weights))

    def test_embedded_weights_index_original_features(self, small_mcc):
        config = RankingConfig(
            k_neighbors=3,
            use_embedding=True,
            embedding=EmbeddingConfig(d=2, k_neighbors=5, n_epochs=10),
        )
        result = rank_mcc(small_mcc, config)
        assert result.weights.shape == (5,)
        assert result.dimension == 2
        assert result.variant == "reliefe"
        assert {"sparsify", "embed", "rank"} <= set(result.timings)

    def test_updates_read_sparsified_features(self):
        """A sparsified run equals an unsparsified run on the sparsified matrix."""
        dataset, _ = informative_mcc(n=80, informative=3, noise=7, seed=2)
        params = SparsifyParams(epsilon=5.0, density_threshold=0.1, seed=3)
        sparse = maybe_sparsify(dataset.features, params)
        assert sparse.nnz < dataset.features.nnz

        sparsified = rank_mcc(dataset, RankingConfig(iterations=20, k_neighbors=3, seed=1,
                                                     sparsify=params))
        reference = rank_mcc(Dataset(sparse, "mcc", classes=dataset.classes),
                             RankingConfig(iterations=20, k_neighbors=3, seed=1,
                                           sparsify=NO_SPARSIFY))
        np.testing.assert_array_equal(sparsified.weights, reference.weights)

    def test_rejects_multilabel(self, small_mlc):
        with pytest.raises(ConfigError):
            rank_mcc(small_mlc, RankingConfig())

    def test_single_class(self):
        dataset = Dataset(sp.csr_matrix(np.eye(4)), "mcc", classes=[1, 1, 1, 1])
        with pytest.raises(SingleClass):
            rank_mcc(dataset, RankingConfig(k_neighbors=2))

    @pytest.mark.parametrize("seed", range(5))
    def test_informative_feature_first(self, seed):
        rng = np.random.default_rng(seed)
        y = np.arange(200) % 2
        X = rng.uniform(size=(200, 10))
        X[:, 0] = y + rng.normal(scale=0.1, size=200)
        dataset = Dataset(sp.csr_matrix(X), "mcc", classes=y)
        result = rank_mcc(dataset, RankingConfig(seed=seed, sparsify=NO_SPARSIFY))
        assert result.ranking[0] == 0

    @pytest.mark.slow
    @pytest.mark.parametrize("variant", ["relieff", "reliefe-absmean-adaptive"])
    def test_informative_recall(self, variant):
        recalls = []
        for seed in range(5):
            dataset, informative = informative_mcc(n=500, informative=10, noise=90, seed=seed)
            result = rank_mcc(dataset, RankingConfig.for_variant(variant, seed=seed))
            recalls.append(recall_at_k(result, informative, 20))
        assert np.median(recalls) >= 0.8
