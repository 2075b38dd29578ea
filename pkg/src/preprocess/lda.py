"""
LDA 차원 축소
화자 간/내 산포의 일반화 고유벡터로 투영 행렬 학습
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.domain.entities import EmbeddingSet
from src.domain.errors import DimMismatch, EmptySet, InvalidConfig, OutDimTooLarge, TooFewClasses
from src.linalg.symmat import SymMatrix, floor_spd, simultaneous_diag


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LdaProjection:
    """
    LDA 투영

    Attributes:
        basis: (out_dim, in_dim) 투영 행렬 (각 행은 화자 내 분산 1로 정규화)
        mean: 학습 데이터 평균 (in_dim)
        eigvals: 유지한 방향의 일반화 고유값 (내림차순, 정보용)
    """
    basis: np.ndarray
    mean: np.ndarray
    eigvals: Optional[np.ndarray] = None

    def __post_init__(self):
        basis = np.array(self.basis, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[0] < 1:
            raise DimMismatch(f"투영 행렬 크기가 잘못되었습니다: {basis.shape}")
        mean = np.array(self.mean, dtype=np.float64).reshape(-1)
        if mean.shape[0] != basis.shape[1]:
            raise DimMismatch(f"평균 차원 {mean.shape[0]}이 입력 차원 {basis.shape[1]}과 다릅니다")
        if basis.shape[0] > basis.shape[1]:
            raise OutDimTooLarge(f"출력 차원 {basis.shape[0]}이 입력 차원 {basis.shape[1]}보다 큽니다")

        eigvals = np.zeros(basis.shape[0]) if self.eigvals is None else np.array(self.eigvals, dtype=np.float64)
        for array in (basis, mean, eigvals):
            array.flags.writeable = False
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "eigvals", eigvals)

    @property
    def in_dim(self) -> int:
        return self.basis.shape[1]

    @property
    def out_dim(self) -> int:
        return self.basis.shape[0]


def _class_scatters(data: EmbeddingSet):
    groups = data.speaker_groups()
    vectors = data.vectors
    mean = vectors.mean(axis=0)

    between = np.zeros((data.dim, data.dim))
    within = np.zeros((data.dim, data.dim))
    for rows in groups.values():
        class_vectors = vectors[rows]
        class_mean = class_vectors.mean(axis=0)
        offset = class_mean - mean
        between += len(rows) * np.outer(offset, offset)
        deviations = class_vectors - class_mean
        within += deviations.T @ deviations

    n = len(data)
    return mean, SymMatrix(between / n), SymMatrix(within / n), len(groups)


def lda_fit(data: EmbeddingSet, out_dim: int) -> LdaProjection:
    """
    LDA 학습

    클래스 수 가중 화자 간 산포와 풀링된 화자 내 산포를 동시 대각화하여
    고유값이 큰 out_dim개 방향을 유지

    Args:
        data: 레이블된 임베딩 집합
        out_dim: 출력 차원

    Returns:
        LdaProjection

    Raises:
        TooFewClasses: 화자가 2명 미만
        OutDimTooLarge: out_dim > 화자 수 − 1 또는 > 입력 차원
    """
    if len(data) == 0:
        raise EmptySet("LDA 학습 데이터가 비어 있습니다")
    if out_dim < 1:
        raise InvalidConfig(f"LDA 출력 차원은 1 이상이어야 합니다 (현재: {out_dim})")
    if not data.is_labeled:
        raise TooFewClasses("LDA 학습에는 화자 레이블이 필요합니다")

    mean, between, within, n_classes = _class_scatters(data)
    if n_classes < 2:
        raise TooFewClasses(f"LDA에는 클래스가 2개 이상 필요합니다 (현재: {n_classes})")
    if out_dim > n_classes - 1 or out_dim > data.dim:
        raise OutDimTooLarge(
            f"LDA 출력 차원 {out_dim}이 허용 범위를 넘습니다 "
            f"(클래스 수 − 1 = {n_classes - 1}, 입력 차원 = {data.dim})"
        )

    sd = simultaneous_diag(between, floor_spd(within))
    basis = sd.basis[:, :out_dim].T

    logger.info(
        f"LDA 학습 완료: {data.dim} → {out_dim}차원 ({n_classes}개 클래스, {len(data)}개 레코드)"
    )
    return LdaProjection(basis=basis, mean=mean, eigvals=sd.eigvals[:out_dim])


def lda_apply(projection: LdaProjection, data: EmbeddingSet) -> EmbeddingSet:
    """
    투영 적용: basis · (v − mean)

    Raises:
        DimMismatch: 입력 차원이 다른 경우
    """
    if data.dim != projection.in_dim:
        raise DimMismatch(f"LDA 입력 차원 {projection.in_dim}과 데이터 차원 {data.dim}이 다릅니다")
    if len(data) == 0:
        return EmbeddingSet(projection.out_dim, [], [], np.zeros((0, projection.out_dim)))
    projected = (data.vectors - projection.mean) @ projection.basis.T
    return data.with_vectors(projected)
