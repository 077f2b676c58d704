"""Tests for probabilistic sparsification."""

import numpy as np
import pytest
import scipy.sparse as sp

from core.errors import ConfigError, DegenerateInput
from core.params import SparsifyParams
from modules.sparsify import estimate_epsilon, maybe_sparsify, prms, spectral_norm


class TestEstimateEpsilon:
    def test_all_ones(self):
        assert estimate_epsilon(sp.csr_matrix([[1.0, 1.0], [1.0, 1.0]])) == pytest.approx(0.5)

    def test_single_entry(self):
        """One entry 6 in a 1 x 2 matrix: 6 / 3."""
        assert estimate_epsilon(sp.csr_matrix([[6.0, 0.0]])) == pytest.approx(2.0)

    def test_matches_dense_symmetrisation(self, rng):
        B = rng.normal(size=(50, 30))
        A = np.zeros((80, 80))
        A[:50, 50:] = B
        A[50:, :50] = B.T
        expected = np.abs(A).sum(axis=1).max() / 80.0
        assert estimate_epsilon(sp.csr_matrix(B)) == pytest.approx(expected, rel=1e-12)

    def test_zero_matrix(self):
        with pytest.raises(DegenerateInput):
            estimate_epsilon(sp.csr_matrix((3, 3)))


class TestPrms:
    """Entrywise keep / clamp / drop behaviour."""

    def test_tiny_epsilon_keeps_everything(self, rng):
        B = sp.csr_matrix(rng.normal(size=(20, 10)))
        out = prms(B, SparsifyParams(epsilon=1e-12, seed=3))
        np.testing.assert_array_equal(out.toarray(), B.toarray())

    def test_shape_preserved(self, rng):
        B = sp.csr_matrix(rng.uniform(size=(7, 13)))
        assert prms(B, SparsifyParams(seed=1)).shape == (7, 13)

    def test_small_entries_clamped_or_dropped(self, rng):
        """Survivors below the cutoff carry exactly +-eps/sqrt(n)."""
        B = rng.normal(scale=0.1, size=(30, 20))
        epsilon = 2.0
        cutoff = epsilon / np.sqrt(50)
        out = prms(sp.csr_matrix(B), SparsifyParams(epsilon=epsilon, seed=5)).toarray()
        small = np.abs(B) <= cutoff
        np.testing.assert_array_equal(out[~small], B[~small])
        survivors = out[small][out[small] != 0]
        np.testing.assert_allclose(np.abs(survivors), cutoff)
        np.testing.assert_array_equal(np.sign(out[small & (out != 0)]),
                                      np.sign(B[small & (out != 0)]))

    def test_unbiased_small_entry(self):
        """Seeded resamples average to the input entry."""
        B = sp.csr_matrix([[0.3, 5.0]])
        epsilon = 1.0
        cutoff = epsilon / np.sqrt(3)
        p = 0.3 / cutoff
        samples = np.array([
            prms(B, SparsifyParams(epsilon=epsilon, seed=seed)).toarray()[0]
            for seed in range(4000)
        ])
        assert np.all(samples[:, 1] == 5.0)
        standard_error = cutoff * np.sqrt(p * (1 - p) / samples.shape[0])
        assert abs(samples[:, 0].mean() - 0.3) < 4 * standard_error

    def test_deterministic(self, rng):
        B = sp.csr_matrix(rng.uniform(size=(40, 40)))
        params = SparsifyParams(seed=9)
        first = prms(B, params)
        second = prms(B, params)
        assert (first != second).nnz == 0

    def test_parallel_blocks_match_serial(self, rng):
        """Row blocks consume the same draws as one serial pass."""
        B = sp.csr_matrix(rng.uniform(size=(5000, 3)))
        params = SparsifyParams(seed=2)
        serial = prms(B, params, n_jobs=1)
        parallel = prms(B, params, n_jobs=2)
        assert (serial != parallel).nnz == 0

    @pytest.mark.slow
    def test_spectral_closeness(self):
        for seed in range(3):
            B = np.random.default_rng(seed).normal(size=(300, 300))
            epsilon = estimate_epsilon(sp.csr_matrix(B))
            out = prms(sp.csr_matrix(B), SparsifyParams(seed=seed))
            error = spectral_norm(sp.csr_matrix(B) - out, n_iter=100, seed=seed)
            assert error <= 5 * epsilon

    @pytest.mark.slow
    def test_unbiased_on_gaussian_matrix(self):
        """20 sub-threshold entries of a 300 x 300 Gaussian average out over 10k seeds."""
        B = np.random.default_rng(0).normal(size=(300, 300))
        matrix = sp.csr_matrix(B)
        epsilon = estimate_epsilon(matrix)
        cutoff = epsilon / np.sqrt(600)
        # entries far below the cutoff are almost never kept; the normal bound needs p >= 0.1
        rows, cols = np.nonzero((np.abs(B) <= cutoff) & (np.abs(B) >= 0.1 * cutoff))
        pick = np.random.default_rng(1).choice(rows.size, size=20, replace=False)
        rows, cols = rows[pick], cols[pick]

        resamples = 10_000
        total = np.zeros(20)
        for seed in range(resamples):
            out = prms(matrix, SparsifyParams(epsilon=epsilon, seed=seed))
            total += np.asarray(out[rows, cols]).ravel()

        values = B[rows, cols]
        p = np.abs(values) / cutoff
        standard_error = cutoff * np.sqrt(p * (1 - p) / resamples)
        assert np.all(np.abs(total / resamples - values) <= 3 * standard_error)


class TestMaybeSparsify:
    def test_sparse_input_unchanged(self):
        X = sp.random(200, 200, density=0.005, format="csr", random_state=0)
        out = maybe_sparsify(X, SparsifyParams())
        assert (out != X).nnz == 0

    def test_dense_input_sparsified(self, rng):
        X = sp.csr_matrix(rng.uniform(size=(100, 100)))
        out = maybe_sparsify(X, SparsifyParams(epsilon=5.0, seed=1))
        assert out.nnz < X.nnz

    def test_threshold_one_disables(self, rng):
        X = sp.csr_matrix(rng.uniform(size=(10, 10)))
        out = maybe_sparsify(X, SparsifyParams(density_threshold=1.0))
        assert (out != X).nnz == 0


class TestParams:
    def test_epsilon_must_be_positive(self):
        with pytest.raises(ConfigError):
            SparsifyParams(epsilon=0.0)

    def test_threshold_range(self):
        with pytest.raises(ConfigError):
            SparsifyParams(density_threshold=1.5)


def test_spectral_norm_diagonal():
    assert spectral_norm(np.diag([3.0, 1.0]), n_iter=200) == pytest.approx(3.0, rel=1e-6)
