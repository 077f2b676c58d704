"""
ReliefE Core Modules
"""

from .database import RunDatabase, RunManifest
from .dataset import Dataset, load_dataset
from .errors import ReliefEError
from .params import EmbeddingConfig, RankingConfig, SparsifyParams

__all__ = [
    'RunDatabase',
    'RunManifest',
    'Dataset',
    'load_dataset',
    'ReliefEError',
    'EmbeddingConfig',
    'RankingConfig',
    'SparsifyParams',
]
