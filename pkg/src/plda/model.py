"""
Two-covariance PLDA 모델
레이블된 임베딩으로 {Φ_b, Φ_w} 추정 및 로그우도비 채점
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from src.domain.entities import EmbeddingSet
from src.domain.errors import (
    DimMismatch,
    NoWithinSpeakerVariation,
    Singular,
    TooFewRecords,
    TooFewSpeakers,
)
from src.linalg.symmat import SymMatrix, floor_spd


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PldaModel:
    """
    Two-covariance PLDA 모델

    Attributes:
        mu: 전역 평균 벡터
        phi_b: 화자 간 공분산 Φ_b (PSD)
        phi_w: 화자 내 공분산 Φ_w (SPD)
    """
    mu: np.ndarray
    phi_b: SymMatrix
    phi_w: SymMatrix

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64).reshape(-1)
        if mu.shape[0] != self.phi_b.dim or self.phi_b.dim != self.phi_w.dim:
            raise DimMismatch(
                f"PLDA 차원이 일치하지 않습니다 "
                f"(mu={mu.shape[0]}, phi_b={self.phi_b.dim}, phi_w={self.phi_w.dim})"
            )
        mu.flags.writeable = False
        object.__setattr__(self, "mu", mu)

    @property
    def dim(self) -> int:
        return self.phi_b.dim

    @property
    def total(self) -> SymMatrix:
        """전체 공분산 T = Φ_b + Φ_w"""
        return self.phi_b + self.phi_w


def total_covariance(data: EmbeddingSet) -> SymMatrix:
    """
    전체 공분산 (최대우도, N으로 나눔)

    Args:
        data: 임베딩 집합 (레이블 불필요)

    Returns:
        표본 평균 기준 표본 공분산

    Raises:
        TooFewRecords: 레코드가 2개 미만인 경우
    """
    if len(data) < 2:
        raise TooFewRecords(f"전체 공분산에는 레코드가 2개 이상 필요합니다 (현재: {len(data)})")

    centered = data.vectors - data.vectors.mean(axis=0)
    return SymMatrix(centered.T @ centered / len(data))


def train_plda(data: EmbeddingSet) -> PldaModel:
    """
    모멘트 기반 PLDA 학습

    - mu: 전역 표본 평균
    - phi_w: 화자별 평균 기준 산포 합 / 전체 발화 수
    - phi_b: 화자 평균들의 (가중치 없는) 공분산, S로 나눔

    Args:
        data: 레이블된 임베딩 집합

    Returns:
        PldaModel

    Raises:
        TooFewSpeakers: 화자가 2명 미만인 경우
        NoWithinSpeakerVariation: 모든 화자의 발화가 1개인 경우
    """
    if not data.is_labeled:
        raise TooFewSpeakers("PLDA 학습에는 화자 레이블이 필요합니다")

    groups = data.speaker_groups()
    if len(groups) < 2:
        raise TooFewSpeakers(f"PLDA 학습에는 화자가 2명 이상 필요합니다 (현재: {len(groups)})")
    if all(len(rows) < 2 for rows in groups.values()):
        raise NoWithinSpeakerVariation("발화가 2개 이상인 화자가 없습니다")

    vectors = data.vectors
    dim = data.dim
    mu = vectors.mean(axis=0)

    speaker_means = np.empty((len(groups), dim))
    within_scatter = np.zeros((dim, dim))
    for s, rows in enumerate(groups.values()):
        spk_vectors = vectors[rows]
        spk_mean = spk_vectors.mean(axis=0)
        speaker_means[s] = spk_mean
        deviations = spk_vectors - spk_mean
        within_scatter += deviations.T @ deviations

    means_centered = speaker_means - speaker_means.mean(axis=0)
    phi_b = SymMatrix(means_centered.T @ means_centered / len(groups))
    phi_w_raw = SymMatrix(within_scatter / len(data))

    # 화자 내 분산이 0이면 데이터 전체 크기 기준으로 플로어링
    reference = float(np.max(np.abs(total_covariance(data).eigvalsh())))
    phi_w = floor_spd(phi_w_raw, reference_scale=reference)

    logger.info(
        f"PLDA 학습 완료: {len(groups)}명 화자, {len(data)}개 발화, {dim}차원 "
        f"(tr Φ_b={phi_b.trace():.4g}, tr Φ_w={phi_w.trace():.4g})"
    )
    return PldaModel(mu=mu, phi_b=phi_b, phi_w=phi_w)


def _gaussian_logpdf(x: np.ndarray, cov: np.ndarray) -> float:
    """영평균 가우시안 로그 밀도 (Cholesky 분해)"""
    try:
        factor = linalg.cho_factor(cov, lower=True)
    except linalg.LinAlgError as e:
        raise Singular(f"공분산 행렬의 Cholesky 분해 실패: {e}")

    solved = linalg.cho_solve(factor, x)
    log_det = 2.0 * np.sum(np.log(np.diag(factor[0])))
    return float(-0.5 * (x @ solved + log_det + x.shape[0] * np.log(2.0 * np.pi)))


def score_llr(model: PldaModel, enroll: np.ndarray, test: np.ndarray) -> float:
    """
    두 벡터의 PLDA 로그우도비

    log N([e;t]; 0, [[T, Φ_b], [Φ_b, T]]) − log N(e; 0, T) − log N(t; 0, T)
    (T = Φ_b + Φ_w, e/t는 mu를 뺀 벡터)

    Args:
        model: PLDA 모델
        enroll: 등록 벡터
        test: 테스트 벡터

    Returns:
        로그우도비 점수

    Raises:
        DimMismatch: 벡터 차원이 모델과 다른 경우
        Singular: 동일 화자 공분산이 특이한 경우
    """
    e = np.asarray(enroll, dtype=np.float64).reshape(-1) - model.mu
    t = np.asarray(test, dtype=np.float64).reshape(-1) - model.mu
    if e.shape[0] != model.dim or t.shape[0] != model.dim:
        raise DimMismatch(f"벡터 차원이 모델 차원 {model.dim}과 다릅니다")

    total = model.total.entries
    between = model.phi_b.entries
    stacked = np.block([[total, between], [between, total]])

    same = _gaussian_logpdf(np.concatenate([e, t]), stacked)
    different = _gaussian_logpdf(e, total) + _gaussian_logpdf(t, total)
    return same - different
