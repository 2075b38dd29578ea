"""
합성 도메인 이동 코퍼스 생성기
가우시안 화자 임베딩과 아핀 도메인 이동, 정답 공분산 제공
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.stats import ortho_group

from src.adapt.catalog import CovarianceCatalog
from src.domain.entities import EmbeddingSet, Trial, TrialLabel, TrialSet
from src.domain.errors import InvalidConfig
from src.linalg.symmat import SymMatrix, eigen_floor, psd_sqrt


logger = logging.getLogger(__name__)

SHIFT_MODES = ("symmetric", "general")

# 난수 스트림 ID
_STREAM_TRUTH = 0
_STREAM_OOD = 1
_STREAM_IND = 2
_STREAM_EVAL = 3
_STREAM_COHORT = 4
_STREAM_TRIALS = 5


@dataclass
class SynthConfig:
    """
    합성 코퍼스 설정

    phi_b_true / phi_w_true / shift_matrix / shift_offset을 주지 않으면
    seed에서 무작위로 생성
    """
    dim: int = 8
    n_speakers_ood: int = 500
    utts_per_speaker_ood: int = 8
    n_speakers_ind: int = 60
    utts_per_speaker_ind: int = 8
    n_speakers_eval: int = 40
    utts_per_speaker_eval: int = 4
    n_cohort: int = 200
    nontarget_ratio: float = 20.0
    shift_mode: str = "symmetric"     # symmetric: A = R·diag(s)·Rᵀ, general: A = R1·diag(s)·R2ᵀ
    shift_min: float = 0.5
    shift_max: float = 2.0
    offset_scale: float = 1.0
    between_scale: float = 1.0
    within_scale: float = 0.5
    seed: int = 0
    phi_b_true: Optional[SymMatrix] = None
    phi_w_true: Optional[SymMatrix] = None
    shift_matrix: Optional[np.ndarray] = None
    shift_offset: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidConfig(f"dim은 1 이상이어야 합니다 (현재: {self.dim})")
        for name in ("n_speakers_ood", "n_speakers_ind", "n_speakers_eval"):
            if getattr(self, name) < 2:
                raise InvalidConfig(f"{name}은 2 이상이어야 합니다")
        for name in ("utts_per_speaker_ood", "utts_per_speaker_ind"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name}은 1 이상이어야 합니다")
        if self.utts_per_speaker_eval < 2:
            raise InvalidConfig("utts_per_speaker_eval은 등록/테스트 분할을 위해 2 이상이어야 합니다")
        if self.n_cohort < 0:
            raise InvalidConfig("n_cohort는 0 이상이어야 합니다")
        if self.nontarget_ratio <= 0:
            raise InvalidConfig("nontarget_ratio는 양수여야 합니다")
        if self.shift_mode not in SHIFT_MODES:
            raise InvalidConfig(f"shift_mode는 {SHIFT_MODES} 중 하나여야 합니다 (현재: {self.shift_mode})")
        if not 0 < self.shift_min <= self.shift_max:
            raise InvalidConfig("0 < shift_min <= shift_max 이어야 합니다")
        if self.seed < 0:
            raise InvalidConfig("seed는 0 이상이어야 합니다")
        self._check_truth()

    def _check_truth(self):
        if self.phi_b_true is not None:
            eigvals = self.phi_b_true.eigvalsh()
            if self.phi_b_true.dim != self.dim or eigvals[0] < -eigen_floor(eigvals):
                raise InvalidConfig("phi_b_true는 dim 차원 PSD 행렬이어야 합니다")
        if self.phi_w_true is not None:
            eigvals = self.phi_w_true.eigvalsh()
            if self.phi_w_true.dim != self.dim or eigvals[0] <= eigen_floor(eigvals):
                raise InvalidConfig("phi_w_true는 dim 차원 SPD 행렬이어야 합니다")
        if self.shift_matrix is not None:
            shift = np.asarray(self.shift_matrix, dtype=np.float64)
            if shift.shape != (self.dim, self.dim):
                raise InvalidConfig(f"shift 행렬 크기가 잘못되었습니다: {shift.shape}")
            singular_values = linalg.svdvals(shift)
            if singular_values[-1] <= 1e-12 * singular_values[0]:
                raise InvalidConfig("shift 행렬이 가역이어야 합니다")
        if self.shift_offset is not None and np.shape(self.shift_offset) != (self.dim,):
            raise InvalidConfig("shift 오프셋 차원이 dim과 같아야 합니다")


@dataclass(frozen=True)
class SynthTruth:
    """모집단 파라미터 (Φ_b, Φ_w, v → A·v + b)"""
    phi_b: SymMatrix
    phi_w: SymMatrix
    shift_matrix: np.ndarray
    shift_offset: np.ndarray

    def catalog(self) -> CovarianceCatalog:
        """정답 공분산 카탈로그"""
        total = self.phi_b + self.phi_w
        return CovarianceCatalog(
            phi_o_b=self.phi_b,
            phi_o_w=self.phi_w,
            c_o=total,
            c_i=total.congruence(self.shift_matrix),
            phi_i_b=self.phi_b.congruence(self.shift_matrix),
            phi_i_w=self.phi_w.congruence(self.shift_matrix),
        )


@dataclass
class EvaluationSplit:
    """InD 평가 데이터 (등록, 테스트, 코호트, trial)"""
    enroll: EmbeddingSet
    test: EmbeddingSet
    cohort: EmbeddingSet
    trials: TrialSet = field(default_factory=TrialSet)


def _stream(config: SynthConfig, *keys: int) -> np.random.Generator:
    # 화자별 독립 스트림: 생성 순서와 무관하게 결정적
    return np.random.default_rng([config.seed, *keys])


def _random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.ones((1, 1))
    return ortho_group.rvs(dim, random_state=rng)


def resolve_truth(config: SynthConfig) -> SynthTruth:
    """설정에서 모집단 파라미터 결정 (빈 항목은 seed로 생성)"""
    rng = _stream(config, _STREAM_TRUTH)
    dim = config.dim

    rotation_b = _random_rotation(dim, rng)
    spectrum_b = config.between_scale * rng.uniform(0.2, 2.0, dim)
    rotation_w = _random_rotation(dim, rng)
    spectrum_w = config.within_scale * rng.uniform(0.2, 1.0, dim)
    rotation_a = _random_rotation(dim, rng)
    rotation_a2 = _random_rotation(dim, rng)
    scales = rng.uniform(config.shift_min, config.shift_max, dim)
    offset = config.offset_scale * rng.standard_normal(dim)

    phi_b = config.phi_b_true
    if phi_b is None:
        phi_b = SymMatrix((rotation_b * spectrum_b) @ rotation_b.T)
    phi_w = config.phi_w_true
    if phi_w is None:
        phi_w = SymMatrix((rotation_w * spectrum_w) @ rotation_w.T)

    shift = config.shift_matrix
    if shift is None:
        second = rotation_a if config.shift_mode == "symmetric" else rotation_a2
        shift = (rotation_a * scales) @ second.T
    shift = np.array(shift, dtype=np.float64)

    if config.shift_offset is not None:
        offset = np.array(config.shift_offset, dtype=np.float64)

    return SynthTruth(phi_b=phi_b, phi_w=phi_w, shift_matrix=shift, shift_offset=offset)


def _draw_speakers(
    config: SynthConfig,
    truth: SynthTruth,
    stream_id: int,
    prefix: str,
    n_speakers: int,
    utts_per_speaker: int,
    shifted: bool
) -> Tuple[List[str], List[str], np.ndarray]:
    between_root = psd_sqrt(truth.phi_b).entries
    within_root = psd_sqrt(truth.phi_w).entries
    dim = config.dim

    utterance_ids: List[str] = []
    speaker_ids: List[str] = []
    blocks = []
    for s in range(n_speakers):
        rng = _stream(config, stream_id, s)
        speaker_mean = between_root @ rng.standard_normal(dim)
        noise = rng.standard_normal((utts_per_speaker, dim)) @ within_root
        vectors = speaker_mean + noise
        if shifted:
            vectors = vectors @ truth.shift_matrix.T + truth.shift_offset

        speaker_id = f"{prefix}_spk{s:05d}"
        for u in range(utts_per_speaker):
            utterance_ids.append(f"{speaker_id}_u{u:03d}")
            speaker_ids.append(speaker_id)
        blocks.append(vectors)

    return utterance_ids, speaker_ids, np.vstack(blocks)


def _domain_set(config, truth, stream_id, prefix, n_speakers, utts, shifted) -> EmbeddingSet:
    utterance_ids, speaker_ids, vectors = _draw_speakers(
        config, truth, stream_id, prefix, n_speakers, utts, shifted
    )
    return EmbeddingSet(config.dim, utterance_ids, speaker_ids, vectors)


def generate(config: SynthConfig) -> Tuple[EmbeddingSet, EmbeddingSet, CovarianceCatalog]:
    """
    OOD/InD 학습 코퍼스 생성

    OOD: 화자 평균 ~ N(0, Φ_b) + 발화 잡음 ~ N(0, Φ_w)
    InD: 같은 방식으로 뽑은 뒤 v → A·v + b

    Args:
        config: 합성 설정

    Returns:
        (OOD 집합, InD 집합, 정답 카탈로그) 튜플
    """
    truth = resolve_truth(config)
    ood = _domain_set(
        config, truth, _STREAM_OOD, "ood",
        config.n_speakers_ood, config.utts_per_speaker_ood, shifted=False
    )
    ind = _domain_set(
        config, truth, _STREAM_IND, "ind",
        config.n_speakers_ind, config.utts_per_speaker_ind, shifted=True
    )
    logger.info(
        f"합성 코퍼스 생성: OOD {len(ood)}개, InD {len(ind)}개 ({config.dim}차원, "
        f"seed={config.seed}, shift={config.shift_mode})"
    )
    return ood, ind, truth.catalog()


def make_trials(
    enroll: EmbeddingSet,
    test: EmbeddingSet,
    nontarget_ratio: float,
    rng: np.random.Generator
) -> TrialSet:
    """
    등록 × 테스트 발화 trial 목록

    같은 화자 쌍은 모두 target, nontarget은 target 수 × 비율만큼 비복원 추출.
    결과는 (등록 ID, 테스트 ID) 순으로 정렬
    """
    enroll_speakers = np.array(enroll.speaker_ids, dtype=object)
    test_speakers = np.array(test.speaker_ids, dtype=object)
    same = enroll_speakers[:, None] == test_speakers[None, :]

    target_pairs = np.argwhere(same)
    nontarget_pairs = np.argwhere(~same)

    wanted = int(round(nontarget_ratio * len(target_pairs)))
    if wanted > len(nontarget_pairs):
        logger.warning(
            f"요청한 nontarget 수 {wanted}개가 가능한 쌍 {len(nontarget_pairs)}개보다 많아 제한합니다"
        )
        wanted = len(nontarget_pairs)
    chosen = np.sort(rng.choice(len(nontarget_pairs), size=wanted, replace=False))

    trials = [
        Trial(enroll.utterance_ids[e], test.utterance_ids[t], TrialLabel.TARGET)
        for e, t in target_pairs
    ]
    trials += [
        Trial(enroll.utterance_ids[e], test.utterance_ids[t], TrialLabel.NONTARGET)
        for e, t in nontarget_pairs[chosen]
    ]
    trials.sort(key=lambda trial: (trial.enroll_id, trial.test_id))
    return TrialSet(trials)


def generate_evaluation(config: SynthConfig) -> EvaluationSplit:
    """
    InD 평가 데이터 생성

    학습 화자와 겹치지 않는 평가 화자의 발화를 앞 절반(등록)과 나머지(테스트)로 나누고,
    레이블 없는 코호트와 trial 목록을 함께 생성

    Returns:
        EvaluationSplit
    """
    truth = resolve_truth(config)
    utterance_ids, speaker_ids, vectors = _draw_speakers(
        config, truth, _STREAM_EVAL, "eval",
        config.n_speakers_eval, config.utts_per_speaker_eval, shifted=True
    )

    n_enroll = config.utts_per_speaker_eval // 2
    enroll_rows = [i for i in range(len(utterance_ids)) if i % config.utts_per_speaker_eval < n_enroll]
    test_rows = [i for i in range(len(utterance_ids)) if i % config.utts_per_speaker_eval >= n_enroll]

    def subset(rows: List[int]) -> EmbeddingSet:
        return EmbeddingSet(
            config.dim,
            [utterance_ids[i] for i in rows],
            [speaker_ids[i] for i in rows],
            vectors[rows],
        )

    enroll = subset(enroll_rows)
    test = subset(test_rows)

    if config.n_cohort > 0:
        cohort = _domain_set(
            config, truth, _STREAM_COHORT, "cohort", config.n_cohort, 1, shifted=True
        ).without_labels()
    else:
        cohort = EmbeddingSet(config.dim, [], [], np.zeros((0, config.dim)))

    trials = make_trials(enroll, test, config.nontarget_ratio, _stream(config, _STREAM_TRIALS))
    n_targets = sum(1 for trial in trials if trial.is_target)
    logger.info(
        f"평가 데이터 생성: 등록 {len(enroll)}개, 테스트 {len(test)}개, 코호트 {len(cohort)}개, "
        f"trial {len(trials)}개 (target {n_targets}개)"
    )
    return EvaluationSplit(enroll=enroll, test=test, cohort=cohort, trials=trials)
