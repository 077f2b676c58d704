"""
ReliefE Pipeline Modules
"""

from .embed import manifold_projection
from .evaluation import aurf1, probe_f1, rf1_curve
from .intrinsic_dim import estimate_dimension
from .rank_mcc import rank_mcc
from .rank_mlc import rank_mlc
from .ranking import RankingResult
from .sparsify import maybe_sparsify, prms

__all__ = [
    'manifold_projection',
    'aurf1',
    'probe_f1',
    'rf1_curve',
    'estimate_dimension',
    'rank_mcc',
    'rank_mlc',
    'RankingResult',
    'maybe_sparsify',
    'prms',
]
