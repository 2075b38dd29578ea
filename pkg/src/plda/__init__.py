"""
PLDA 모듈
Two-covariance PLDA 학습 및 채점
"""
from src.plda.model import PldaModel, total_covariance, train_plda, score_llr
from src.plda.scorer import PldaScorer, score_trials

__all__ = [
    'PldaModel',
    'PldaScorer',
    'total_covariance',
    'train_plda',
    'score_llr',
    'score_trials',
]
