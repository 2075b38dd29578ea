"""
PLDA trial 채점기
닫힌 형태 이차식 커널과 trial 목록 병렬 채점
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Tuple

import numpy as np
from scipy import linalg

from src.domain.entities import EmbeddingSet, TrialSet
from src.domain.errors import DimMismatch, Singular, UnknownUtterance
from src.plda.model import PldaModel


logger = logging.getLogger(__name__)


class PldaScorer:
    """
    PLDA 로그우도비 이차식 커널

    score(e, t) = ½(eᵀQe + tᵀQt) + eᵀPt + c 형태로 전개하여
    여러 trial을 한 번에 채점. score_llr와 수학적으로 동일
    """

    def __init__(self, model: PldaModel):
        """
        Args:
            model: PLDA 모델
        """
        self.model = model
        dim = model.dim
        total = model.total.entries
        between = model.phi_b.entries
        stacked = np.block([[total, between], [between, total]])

        try:
            stacked_factor = linalg.cho_factor(stacked, lower=True)
            total_factor = linalg.cho_factor(total, lower=True)
        except linalg.LinAlgError as e:
            raise Singular(f"PLDA 공분산 분해 실패: {e}")

        stacked_inv = linalg.cho_solve(stacked_factor, np.eye(2 * dim))
        total_inv = linalg.cho_solve(total_factor, np.eye(dim))

        q = total_inv - stacked_inv[:dim, :dim]
        p = -stacked_inv[:dim, dim:]
        self.q = 0.5 * (q + q.T)
        self.p = 0.5 * (p + p.T)

        log_det_total = 2.0 * np.sum(np.log(np.diag(total_factor[0])))
        log_det_stacked = 2.0 * np.sum(np.log(np.diag(stacked_factor[0])))
        self.const = float(log_det_total - 0.5 * log_det_stacked)

    def _center(self, vectors: np.ndarray) -> np.ndarray:
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        if vectors.shape[1] != self.model.dim:
            raise DimMismatch(f"벡터 차원이 모델 차원 {self.model.dim}과 다릅니다")
        return vectors - self.model.mu

    def _self_terms(self, centered: np.ndarray) -> np.ndarray:
        return 0.5 * np.sum((centered @ self.q) * centered, axis=1)

    def score(self, enroll: np.ndarray, test: np.ndarray) -> float:
        """단일 trial 점수"""
        return float(self.score_matrix(enroll, test)[0, 0])

    def score_matrix(self, enroll_vectors: np.ndarray, test_vectors: np.ndarray) -> np.ndarray:
        """
        모든 (등록, 테스트) 조합의 점수 행렬

        Args:
            enroll_vectors: (n_e, dim) 행렬
            test_vectors: (n_t, dim) 행렬

        Returns:
            (n_e, n_t) 점수 행렬
        """
        e = self._center(enroll_vectors)
        t = self._center(test_vectors)
        cross = (e @ self.p) @ t.T
        return self._self_terms(e)[:, None] + self._self_terms(t)[None, :] + cross + self.const

    def score_pairs(
        self,
        enroll_vectors: np.ndarray,
        test_vectors: np.ndarray,
        enroll_index: np.ndarray,
        test_index: np.ndarray,
        workers: int = 1
    ) -> np.ndarray:
        """
        인덱스 쌍 목록 채점

        고유 벡터별 항을 먼저 계산하고, trial별로 행 단위 내적을 수행.
        행 단위 연산이므로 분할 방식과 무관하게 결과가 비트 단위로 동일

        Args:
            enroll_vectors: 고유 등록 벡터 행렬
            test_vectors: 고유 테스트 벡터 행렬
            enroll_index: trial별 등록 행 인덱스
            test_index: trial별 테스트 행 인덱스
            workers: 병렬 워커 수

        Returns:
            trial별 점수 배열
        """
        e = self._center(enroll_vectors)
        t = self._center(test_vectors)
        e_self = self._self_terms(e)
        t_self = self._self_terms(t)
        e_proj = e @ self.p

        def score_chunk(bounds: Tuple[int, int]) -> np.ndarray:
            lo, hi = bounds
            ei = enroll_index[lo:hi]
            ti = test_index[lo:hi]
            cross = np.sum(e_proj[ei] * t[ti], axis=1)
            return e_self[ei] + t_self[ti] + cross + self.const

        n = len(enroll_index)
        if n == 0:
            return np.zeros(0)

        if workers <= 1:
            return score_chunk((0, n))

        edges = np.linspace(0, n, workers + 1).astype(int)
        chunks = [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(score_chunk, chunks))
        return np.concatenate(parts)


def resolve_enrollment(enroll_set: EmbeddingSet, enroll_id: str) -> np.ndarray:
    """
    등록 ID를 벡터로 변환

    발화 ID가 우선이며, 없으면 화자 ID로 보고 해당 발화들을 평균

    Raises:
        UnknownUtterance: 발화/화자 ID 모두 없는 경우
    """
    row = enroll_set.index_of(enroll_id)
    if row is not None:
        return enroll_set.vectors[row]

    rows = [i for i, spk in enumerate(enroll_set.speaker_ids) if spk == enroll_id]
    if not rows:
        raise UnknownUtterance(f"등록 ID를 찾을 수 없습니다: {enroll_id}")
    return enroll_set.vectors[rows].mean(axis=0)


def _unique_vectors(
    ids: List[str],
    lookup
) -> Tuple[np.ndarray, Dict[str, int]]:
    # 정렬된 고유 ID 순서로 행렬 구성 (trial 순서와 무관)
    unique_ids = sorted(set(ids))
    positions = {uid: i for i, uid in enumerate(unique_ids)}
    vectors = [lookup(uid) for uid in unique_ids]
    return np.array(vectors, dtype=np.float64), positions


def gather_trial_vectors(
    enroll_set: EmbeddingSet,
    test_set: EmbeddingSet,
    trials: TrialSet
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    trial 목록의 고유 등록/테스트 벡터와 인덱스 배열 구성

    Returns:
        (등록 벡터, 테스트 벡터, 등록 인덱스, 테스트 인덱스) 튜플
    """
    def test_lookup(test_id: str) -> np.ndarray:
        row = test_set.index_of(test_id)
        if row is None:
            raise UnknownUtterance(f"테스트 발화를 찾을 수 없습니다: {test_id}")
        return test_set.vectors[row]

    enroll_ids = [trial.enroll_id for trial in trials]
    test_ids = [trial.test_id for trial in trials]

    enroll_vectors, enroll_pos = _unique_vectors(
        enroll_ids, lambda uid: resolve_enrollment(enroll_set, uid)
    )
    test_vectors, test_pos = _unique_vectors(test_ids, test_lookup)

    enroll_index = np.array([enroll_pos[uid] for uid in enroll_ids], dtype=np.intp)
    test_index = np.array([test_pos[uid] for uid in test_ids], dtype=np.intp)
    return enroll_vectors, test_vectors, enroll_index, test_index


def score_trials(
    model: PldaModel,
    enroll_set: EmbeddingSet,
    test_set: EmbeddingSet,
    trials: TrialSet,
    workers: int = 1
) -> TrialSet:
    """
    trial 목록 채점

    Args:
        model: PLDA 모델
        enroll_set: 등록 임베딩
        test_set: 테스트 임베딩
        trials: trial 목록
        workers: 병렬 워커 수 (결과는 워커 수와 무관하게 동일)

    Returns:
        점수가 채워진 TrialSet

    Raises:
        UnknownUtterance: 참조 발화가 없는 경우
    """
    if len(trials) == 0:
        return TrialSet([])

    start_time = time.time()
    enroll_vectors, test_vectors, enroll_index, test_index = gather_trial_vectors(
        enroll_set, test_set, trials
    )

    scorer = PldaScorer(model)
    scores = scorer.score_pairs(
        enroll_vectors, test_vectors, enroll_index, test_index, workers=workers
    )

    elapsed = time.time() - start_time
    logger.info(f"trial 채점 완료: {len(trials)}개 ({workers}개 워커, {elapsed:.2f}초)")
    return trials.with_scores(scores)
