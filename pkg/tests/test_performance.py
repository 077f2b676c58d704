"""Runtime contracts on desk-scale synthetic data."""

import json
import time
import tracemalloc

import numpy as np
import pytest
import scipy.sparse as sp

from core.database import RunManifest
from core.dataset import Dataset, write_svmlight
from core.params import EmbeddingConfig, RankingConfig
from main import ReliefEApp
from modules.rank_mcc import rank_mcc


@pytest.mark.slow
class TestRuntime:
    def test_embedded_ranking_single_thread(self):
        """Full embedded ranking of a 2000 x 500 dense problem stays under a minute."""
        rng = np.random.default_rng(0)
        y = rng.integers(0, 2, size=2000)
        X = rng.normal(size=(2000, 500))
        X[:, :20] += (2 * y[:, None] - 1) * 0.5
        dataset = Dataset(sp.csr_matrix(X), "mcc", classes=y)

        config = RankingConfig.for_variant("reliefe-absmean-adaptive", serial=True, n_jobs=1)
        start = time.perf_counter()
        result = rank_mcc(dataset, config)
        elapsed = time.perf_counter() - start

        assert elapsed < 60.0
        assert result.iterations == 2000
        assert np.all(np.isfinite(result.weights))

    def test_stage_timings_cover_the_run(self, tmp_path):
        rng = np.random.default_rng(1)
        y = rng.integers(0, 2, size=1500)
        X = rng.normal(size=(1500, 40)) + y[:, None]
        write_svmlight(tmp_path / "data.svm", sp.csr_matrix(X), y)
        output = tmp_path / "ranking.json"

        app = ReliefEApp(database_path=str(tmp_path / "runs.json"),
                         manifest_dir=str(tmp_path / "manifests"))
        code = app.run(["--no-log-file", "--serial", "rank", str(tmp_path / "data.svm"),
                        "--variant", "reliefe", "--dim", "3", "--epochs", "50",
                        "-o", str(output)])
        assert code == 0
        assert len(json.loads(output.read_text())) == 40

        manifest = RunManifest.load(f"{output}.manifest.json")
        staged = sum(manifest.timings.values())
        assert staged <= manifest.total_seconds
        assert staged >= 0.9 * manifest.total_seconds


@pytest.mark.slow
class TestMemory:
    def test_sparse_embedded_ranking_peak(self):
        """Ranking a 5000 x 20000 CSR input allocates under four times its own arrays."""
        X = sp.random(5000, 20000, density=0.005, format="csr", random_state=0)
        y = np.random.default_rng(2).integers(0, 2, size=5000)
        dataset = Dataset(X, "mcc", classes=y)
        features = dataset.features
        footprint = features.data.nbytes + features.indices.nbytes + features.indptr.nbytes

        # fixed k: an adaptive neighborhood may grow to a whole class of dense rows
        config = RankingConfig.for_variant(
            "reliefe", iterations=500, serial=True, n_jobs=1,
            embedding=EmbeddingConfig(d=8, n_epochs=50, sample_cap=1024),
        )
        tracemalloc.start()
        try:
            result = rank_mcc(dataset, config)
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()

        assert result.weights.shape == (20000,)
        assert peak < 4 * footprint
