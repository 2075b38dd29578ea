"""
전처리 모듈
평균 센터링 및 LDA 차원 축소
"""
from src.preprocess.centering import compute_mean, center
from src.preprocess.lda import LdaProjection, lda_fit, lda_apply

__all__ = [
    'compute_mean',
    'center',
    'LdaProjection',
    'lda_fit',
    'lda_apply',
]
