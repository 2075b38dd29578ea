"""
평균 계산 및 센터링
"""
import numpy as np

from src.domain.entities import EmbeddingSet
from src.domain.errors import DimMismatch, EmptySet


def compute_mean(data: EmbeddingSet) -> np.ndarray:
    """
    산술 평균 벡터

    Raises:
        EmptySet: 빈 집합
    """
    if len(data) == 0:
        raise EmptySet("빈 임베딩 집합의 평균은 정의되지 않습니다")
    return data.vectors.mean(axis=0)


def center(data: EmbeddingSet, mean: np.ndarray) -> EmbeddingSet:
    """
    각 벡터에서 평균을 뺀 새 집합 (ID/레이블 유지)

    Raises:
        DimMismatch: 평균 차원이 다른 경우
    """
    mean = np.asarray(mean, dtype=np.float64).reshape(-1)
    if mean.shape[0] != data.dim:
        raise DimMismatch(f"평균 차원 {mean.shape[0]}이 임베딩 차원 {data.dim}과 다릅니다")
    if len(data) == 0:
        return data
    return data.with_vectors(data.vectors - mean)
