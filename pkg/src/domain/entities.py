"""
도메인 엔티티 정의
화자 검증 백엔드의 핵심 데이터 구조
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.errors import DimMismatch, InvalidConfig, NoNontargets, NoTargets


class TrialLabel(Enum):
    """trial 정답 레이블"""
    TARGET = "target"        # 동일 화자
    NONTARGET = "nontarget"  # 다른 화자


@dataclass(frozen=True)
class EmbeddingRecord:
    """
    임베딩 레코드

    Attributes:
        utterance_id: 발화 ID
        speaker_id: 화자 ID (레이블 없는 데이터는 None)
        vector: 임베딩 벡터
    """
    utterance_id: str
    speaker_id: Optional[str]
    vector: np.ndarray


class EmbeddingSet:
    """
    임베딩 집합

    모든 벡터는 같은 차원이며 발화 ID는 집합 내에서 유일함.
    내부 행렬은 읽기 전용으로 고정됨
    """

    def __init__(
        self,
        dim: int,
        utterance_ids: Sequence[str],
        speaker_ids: Sequence[Optional[str]],
        vectors: np.ndarray
    ):
        """
        Args:
            dim: 임베딩 차원
            utterance_ids: 발화 ID 목록
            speaker_ids: 화자 ID 목록 (없으면 None)
            vectors: (레코드 수, dim) 행렬
        """
        if dim < 1:
            raise DimMismatch(f"임베딩 차원은 1 이상이어야 합니다 (현재: {dim})")

        matrix = np.array(vectors, dtype=np.float64)
        if matrix.size != len(utterance_ids) * dim:
            raise DimMismatch(
                f"벡터 원소 수가 {len(utterance_ids)}×{dim}과 다릅니다 (현재: {matrix.size})"
            )
        matrix = matrix.reshape(len(utterance_ids), dim)
        if len(speaker_ids) != len(utterance_ids):
            raise DimMismatch("발화 ID와 화자 ID 개수가 일치해야 합니다")
        if len(set(utterance_ids)) != len(utterance_ids):
            raise InvalidConfig("발화 ID는 집합 내에서 유일해야 합니다")

        matrix.flags.writeable = False
        self.dim = dim
        self.utterance_ids: Tuple[str, ...] = tuple(utterance_ids)
        self.speaker_ids: Tuple[Optional[str], ...] = tuple(speaker_ids)
        self.vectors = matrix
        self._index: Optional[Dict[str, int]] = None

    @classmethod
    def from_records(cls, dim: int, records: Sequence[EmbeddingRecord]) -> 'EmbeddingSet':
        """레코드 목록에서 집합 생성"""
        for record in records:
            if np.shape(record.vector) != (dim,):
                raise DimMismatch(
                    f"발화 {record.utterance_id}의 차원이 {dim}이 아닙니다"
                )
        vectors = np.array([r.vector for r in records], dtype=np.float64).reshape(len(records), dim)
        return cls(
            dim=dim,
            utterance_ids=[r.utterance_id for r in records],
            speaker_ids=[r.speaker_id for r in records],
            vectors=vectors
        )

    def __len__(self) -> int:
        return len(self.utterance_ids)

    @property
    def records(self) -> List[EmbeddingRecord]:
        """레코드 목록 반환"""
        return [
            EmbeddingRecord(utt, spk, self.vectors[i])
            for i, (utt, spk) in enumerate(zip(self.utterance_ids, self.speaker_ids))
        ]

    @property
    def is_labeled(self) -> bool:
        """모든 레코드에 화자 ID가 있으면 True"""
        return all(spk is not None for spk in self.speaker_ids)

    def index_of(self, utterance_id: str) -> Optional[int]:
        """발화 ID의 행 인덱스 (없으면 None)"""
        if self._index is None:
            self._index = {utt: i for i, utt in enumerate(self.utterance_ids)}
        return self._index.get(utterance_id)

    def speaker_groups(self) -> Dict[str, List[int]]:
        """
        화자별 행 인덱스 목록

        Returns:
            화자 ID 정렬 순서의 {화자 ID: 행 인덱스 목록} 딕셔너리
        """
        groups: Dict[str, List[int]] = {}
        for i, spk in enumerate(self.speaker_ids):
            if spk is None:
                continue
            groups.setdefault(spk, []).append(i)
        return {spk: groups[spk] for spk in sorted(groups)}

    def with_vectors(self, vectors: np.ndarray) -> 'EmbeddingSet':
        """ID/레이블은 유지하고 벡터만 교체한 새 집합"""
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(self):
            raise DimMismatch(f"벡터 행렬 크기가 잘못되었습니다: {vectors.shape}")
        return EmbeddingSet(vectors.shape[1], self.utterance_ids, self.speaker_ids, vectors)

    def without_labels(self) -> 'EmbeddingSet':
        """화자 레이블을 제거한 집합 (비지도 적응용)"""
        return EmbeddingSet(self.dim, self.utterance_ids, [None] * len(self), self.vectors)


@dataclass(frozen=True)
class Trial:
    """
    검증 trial

    Attributes:
        enroll_id: 등록 발화(또는 등록 화자) ID
        test_id: 테스트 발화 ID
        label: 정답 레이블 (없으면 None)
        score: 점수 (채점 전 None)
    """
    enroll_id: str
    test_id: str
    label: Optional[TrialLabel] = None
    score: Optional[float] = None

    @property
    def is_target(self) -> bool:
        return self.label == TrialLabel.TARGET


@dataclass
class TrialSet:
    """trial 목록"""
    trials: List[Trial] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def with_scores(self, scores: Sequence[float]) -> 'TrialSet':
        """점수를 채운 새 TrialSet 반환"""
        if len(scores) != len(self.trials):
            raise DimMismatch("점수 개수가 trial 개수와 일치해야 합니다")
        return TrialSet([
            replace(trial, score=float(score))
            for trial, score in zip(self.trials, scores)
        ])

    def split_scores(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        평가용 target/nontarget 점수 배열 분리

        Returns:
            (target 점수, nontarget 점수) 튜플

        Raises:
            InvalidConfig: 레이블 또는 유한한 점수가 없는 trial이 있는 경우
            NoTargets / NoNontargets: 한쪽 클래스가 비어 있는 경우
        """
        targets = []
        nontargets = []
        for trial in self.trials:
            if trial.label is None or trial.score is None or not math.isfinite(trial.score):
                raise InvalidConfig(
                    f"평가하려면 모든 trial에 레이블과 유한한 점수가 필요합니다: "
                    f"{trial.enroll_id} {trial.test_id}"
                )
            if trial.is_target:
                targets.append(trial.score)
            else:
                nontargets.append(trial.score)

        if not targets:
            raise NoTargets("target trial이 없습니다")
        if not nontargets:
            raise NoNontargets("nontarget trial이 없습니다")

        return np.array(targets, dtype=np.float64), np.array(nontargets, dtype=np.float64)


@dataclass(frozen=True)
class CostParams:
    """
    검출 비용 파라미터 (SRE'18 기본값)

    Attributes:
        p_targets: target 사전확률 목록
        c_miss: miss 비용
        c_fa: false alarm 비용
    """
    p_targets: Tuple[float, ...] = (0.01, 0.005)
    c_miss: float = 1.0
    c_fa: float = 1.0

    def __post_init__(self):
        if not self.p_targets:
            raise InvalidConfig("p_targets는 비어 있을 수 없습니다")
        if any(not 0.0 < p < 1.0 for p in self.p_targets):
            raise InvalidConfig(f"p_target은 (0, 1) 범위여야 합니다 (현재: {self.p_targets})")
        if self.c_miss <= 0 or self.c_fa <= 0:
            raise InvalidConfig("c_miss, c_fa는 양수여야 합니다")
