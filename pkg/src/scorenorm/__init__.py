"""
점수 정규화 모듈
"""
from src.scorenorm.as_norm import CohortStats, as_norm, normalize_scores, top_k_stats, DEFAULT_TOP_K

__all__ = [
    'CohortStats',
    'as_norm',
    'normalize_scores',
    'top_k_stats',
    'DEFAULT_TOP_K',
]
