"""
적응형 대칭 점수 정규화 (AS-norm)
trial 양쪽 벡터의 top-K 코호트 점수 통계로 원점수 정규화
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.domain.entities import EmbeddingSet, TrialSet
from src.domain.errors import DegenerateCohort, EmptySet, InvalidConfig, KTooLarge
from src.plda.model import PldaModel
from src.plda.scorer import PldaScorer, gather_trial_vectors


logger = logging.getLogger(__name__)

# 코호트 표준편차 하한
MIN_COHORT_STD = 1e-12

DEFAULT_TOP_K = 200


@dataclass(frozen=True)
class CohortStats:
    """
    벡터별 top-K 코호트 점수 통계

    Attributes:
        mean: 벡터별 평균
        std: 벡터별 표준편차 (K로 나눔)
        k: 선택한 코호트 점수 개수
    """
    mean: np.ndarray
    std: np.ndarray
    k: int


def _sorted_cohort(cohort: EmbeddingSet) -> np.ndarray:
    # 발화 ID 순서로 정렬하여 입력 순서와 무관하게 만듦
    order = sorted(range(len(cohort)), key=lambda i: cohort.utterance_ids[i])
    return cohort.vectors[order]


def top_k_stats(cohort_scores: np.ndarray, k: int) -> CohortStats:
    """
    점수 행렬의 행별 top-K 통계

    Args:
        cohort_scores: (벡터 수, 코호트 수) 점수 행렬 (열은 발화 ID 순서)
        k: 선택 개수

    Returns:
        CohortStats

    Raises:
        DegenerateCohort: 표준편차가 하한 미만인 벡터가 있는 경우
    """
    # 점수 내림차순, 동점은 발화 ID 순서 (stable)
    order = np.argsort(-cohort_scores, axis=1, kind="stable")[:, :k]
    selected = np.take_along_axis(cohort_scores, order, axis=1)
    mean = selected.mean(axis=1)
    std = np.sqrt(np.mean((selected - mean[:, None]) ** 2, axis=1))

    if std.size and float(std.min()) < MIN_COHORT_STD:
        raise DegenerateCohort(
            f"코호트 점수 표준편차가 0에 가깝습니다 (최소: {float(std.min()):.3e})"
        )
    return CohortStats(mean=mean, std=std, k=k)


def cohort_stats(scorer: PldaScorer, vectors: np.ndarray, cohort: EmbeddingSet, k: int) -> CohortStats:
    """각 벡터를 모든 코호트 벡터와 채점한 뒤 top-K 통계 계산"""
    scores = scorer.score_matrix(vectors, _sorted_cohort(cohort))
    return top_k_stats(scores, k)


def normalize_scores(
    raw: np.ndarray,
    enroll_mean: np.ndarray,
    enroll_std: np.ndarray,
    test_mean: np.ndarray,
    test_std: np.ndarray
) -> np.ndarray:
    """½·((s − μ_e)/σ_e + (s − μ_t)/σ_t)"""
    return 0.5 * ((raw - enroll_mean) / enroll_std + (raw - test_mean) / test_std)


def as_norm(
    model: PldaModel,
    trials: TrialSet,
    enroll_set: EmbeddingSet,
    test_set: EmbeddingSet,
    cohort: EmbeddingSet,
    k: int = DEFAULT_TOP_K
) -> TrialSet:
    """
    AS-norm 적용

    Args:
        model: 원점수 채점에 쓴 PLDA 모델
        trials: 채점된 trial 목록
        enroll_set: 등록 임베딩
        test_set: 테스트 임베딩
        cohort: 레이블 없는 코호트 임베딩
        k: 쪽별 top-K 개수

    Returns:
        정규화 점수가 채워진 TrialSet

    Raises:
        KTooLarge: k가 코호트 크기보다 큰 경우
        DegenerateCohort: 코호트 점수 표준편차가 0에 가까운 경우
    """
    if len(cohort) == 0:
        raise EmptySet("코호트가 비어 있습니다")
    if k < 1:
        raise InvalidConfig(f"top-K는 1 이상이어야 합니다 (현재: {k})")
    if k > len(cohort):
        raise KTooLarge(f"top-K {k}가 코호트 크기 {len(cohort)}보다 큽니다")
    if len(trials) == 0:
        return TrialSet([])

    raw = []
    for trial in trials:
        if trial.score is None or not math.isfinite(trial.score):
            raise InvalidConfig(f"정규화하려면 채점된 trial이 필요합니다: {trial.enroll_id} {trial.test_id}")
        raw.append(trial.score)
    raw = np.array(raw, dtype=np.float64)

    enroll_vectors, test_vectors, enroll_index, test_index = gather_trial_vectors(
        enroll_set, test_set, trials
    )
    scorer = PldaScorer(model)
    enroll_stats = cohort_stats(scorer, enroll_vectors, cohort, k)
    test_stats = cohort_stats(scorer, test_vectors, cohort, k)

    normalized = normalize_scores(
        raw,
        enroll_stats.mean[enroll_index],
        enroll_stats.std[enroll_index],
        test_stats.mean[test_index],
        test_stats.std[test_index],
    )
    logger.info(f"AS-norm 적용: {len(trials)}개 trial, 코호트 {len(cohort)}개, top-{k}")
    return trials.with_scores(normalized)
