"""
백엔드 파이프라인 서비스
임베딩 → LDA/센터링 → PLDA 학습 → 적응 → 채점 → 정규화 → 평가 통합
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.adapt.adapter import adapt_model
from src.adapt.catalog import CovarianceCatalog
from src.adapt.recipe import PRESET_NAMES, AdaptRecipe, preset
from src.data import formats
from src.data.repository import DirectoryBackendRepository, TrainedBackend
from src.domain.entities import CostParams, EmbeddingSet, TrialSet
from src.domain.errors import InvalidConfig, MissingInDomainModel
from src.metrics.detection import MetricReport, error_curve, evaluate, relative_reduction
from src.plda.model import PldaModel, total_covariance, train_plda
from src.plda.scorer import score_trials
from src.preprocess.centering import center, compute_mean
from src.preprocess.lda import LdaProjection, lda_apply, lda_fit
from src.scorenorm.as_norm import DEFAULT_TOP_K, as_norm
from src.synthgen.generator import SynthConfig, generate, generate_evaluation, resolve_truth


logger = logging.getLogger(__name__)

LDA_SOURCES = ("ood", "ind")

# 센터링 기준 평균 ("none"이면 센터링 생략)
CENTER_OOD_CHOICES = ("ood", "ind", "none")
CENTER_EVAL_CHOICES = ("ind", "ood", "none")

SYNTH_INT_KEYS = (
    "dim", "n_speakers_ood", "utts_per_speaker_ood", "n_speakers_ind", "utts_per_speaker_ind",
    "n_speakers_eval", "utts_per_speaker_eval", "n_cohort", "seed",
)
SYNTH_FLOAT_KEYS = (
    "nontarget_ratio", "shift_min", "shift_max", "offset_scale", "between_scale", "within_scale",
)
SYNTH_FILE_KEYS = ("phi_b_file", "phi_w_file", "shift_file", "offset_file")


class PipelineStage(Enum):
    """파이프라인 단계"""
    TRAIN = "train"
    ADAPT = "adapt"
    SCORE = "score"
    NORMALIZE = "normalize"
    EVALUATE = "evaluate"
    SWEEP = "sweep"
    SYNTH = "synth"


@dataclass
class ScoringOptions:
    """
    채점 옵션

    Attributes:
        snorm_k: AS-norm top-K (코호트가 있을 때만 사용)
        workers: 병렬 채점 워커 수
    """
    snorm_k: int = DEFAULT_TOP_K
    workers: int = 1

    def __post_init__(self):
        if self.snorm_k < 1:
            raise InvalidConfig(f"snorm_k는 1 이상이어야 합니다 (현재: {self.snorm_k})")
        if self.workers < 1:
            raise InvalidConfig(f"workers는 1 이상이어야 합니다 (현재: {self.workers})")


@dataclass
class PipelineConfig:
    """
    파이프라인 설정

    Attributes:
        lda_dim: LDA 출력 차원 (0이면 LDA 비활성화)
        lda_source: LDA 학습 데이터 ("ood" 또는 "ind")
        center_ood: OOD 학습 데이터 센터링 기준 평균
        center_eval: 등록/테스트/코호트 센터링 기준 평균
        scoring: 채점 옵션
        cost: 검출 비용 파라미터
        alpha_grid: sweep 가중치 목록
        recipes: sweep 대상 프리셋 이름 (비어 있으면 카탈로그로 가능한 전체)
    """
    lda_dim: int = 150
    lda_source: str = "ood"
    center_ood: str = "ood"
    center_eval: str = "ind"
    scoring: ScoringOptions = field(default_factory=ScoringOptions)
    cost: CostParams = field(default_factory=CostParams)
    alpha_grid: Tuple[float, ...] = tuple(round(0.1 * i, 10) for i in range(11))
    recipes: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.lda_dim < 0:
            raise InvalidConfig(f"lda_dim은 0 이상이어야 합니다 (현재: {self.lda_dim})")
        if self.lda_source not in LDA_SOURCES:
            raise InvalidConfig(f"lda_source는 {LDA_SOURCES} 중 하나여야 합니다")
        if self.center_ood not in CENTER_OOD_CHOICES:
            raise InvalidConfig(f"center_ood는 {CENTER_OOD_CHOICES} 중 하나여야 합니다 (현재: {self.center_ood})")
        if self.center_eval not in CENTER_EVAL_CHOICES:
            raise InvalidConfig(f"center_eval은 {CENTER_EVAL_CHOICES} 중 하나여야 합니다 (현재: {self.center_eval})")
        if not self.alpha_grid:
            raise InvalidConfig("alpha_grid는 비어 있을 수 없습니다")
        if any(not 0.0 <= a <= 1.0 for a in self.alpha_grid):
            raise InvalidConfig(f"alpha_grid는 [0, 1] 범위여야 합니다: {self.alpha_grid}")


@dataclass(frozen=True)
class SweepRow:
    """sweep 결과 한 행"""
    alpha: float
    recipe: str
    eer: float
    min_cprimary: float


def parse_alpha_grid(text: str) -> Tuple[float, ...]:
    """
    가중치 목록 파싱

    "start:stop:step" 또는 "0,0.5,1" 형식

    Raises:
        InvalidConfig: 형식 오류 또는 [0, 1] 범위 밖
    """
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            if step <= 0 or stop < start:
                raise InvalidConfig(f"가중치 범위가 잘못되었습니다: {text}")
            count = int(round((stop - start) / step)) + 1
            values = tuple(round(start + step * i, 10) for i in range(count))
        else:
            values = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise InvalidConfig(f"가중치 목록을 읽을 수 없습니다: {text}")

    if not values or any(not 0.0 <= v <= 1.0 for v in values):
        raise InvalidConfig(f"가중치는 [0, 1] 범위여야 합니다: {text}")
    return values


# ----------------------------------------------------------------------
# 메모리 내 파이프라인
# ----------------------------------------------------------------------

def train_backend(
    ood: EmbeddingSet,
    ind: EmbeddingSet,
    lda_dim: int = 150,
    lda_source: str = "ood",
    center_ood: str = "ood"
) -> TrainedBackend:
    """
    백엔드 학습

    1. LDA 학습 (lda_dim > 0) 후 두 도메인에 적용
    2. OOD는 center_ood가 가리키는 평균 (기본 OOD 평균), InD는 InD 평균으로 센터링
    3. OOD PLDA, (레이블이 있으면) InD PLDA, 두 도메인 전체 공분산 추정

    Args:
        ood: 레이블된 OOD 임베딩
        ind: InD 임베딩 (레이블 선택)
        lda_dim: LDA 출력 차원 (0이면 비활성화)
        lda_source: LDA 학습 데이터
        center_ood: OOD 센터링 기준 ("ood", "ind", "none")

    Returns:
        TrainedBackend
    """
    start_time = time.time()

    # 1. LDA
    lda: Optional[LdaProjection] = None
    if lda_dim > 0:
        source = ood if lda_source == "ood" else ind
        lda = lda_fit(source, lda_dim)
        ood = lda_apply(lda, ood)
        ind = lda_apply(lda, ind)
    else:
        logger.warning("LDA 비활성화: 원본 차원에서 학습합니다")

    # 2. 센터링
    ood_mean = compute_mean(ood)
    ind_mean = compute_mean(ind)
    ood_centered = _center_by(ood, center_ood, ood_mean, ind_mean)
    ind_centered = center(ind, ind_mean)

    # 3. PLDA / 전체 공분산
    plda_ood = train_plda(ood_centered)
    plda_ind = train_plda(ind_centered) if ind_centered.is_labeled else None
    if plda_ind is None:
        logger.info("InD 레이블 없음: 비지도 적응용 전체 공분산만 추정합니다")

    backend = TrainedBackend(
        ood_mean=ood_mean,
        ind_mean=ind_mean,
        plda_ood=plda_ood,
        cov_ood=total_covariance(ood_centered),
        cov_ind=total_covariance(ind_centered),
        plda_ind=plda_ind,
        lda=lda,
    )
    logger.info(f"백엔드 학습 완료: {backend.dim}차원 ({time.time() - start_time:.2f}초)")
    return backend


def _center_by(data: EmbeddingSet, choice: str, ood_mean: np.ndarray, ind_mean: np.ndarray) -> EmbeddingSet:
    if choice == "none":
        return data
    if choice == "ood":
        return center(data, ood_mean)
    if choice == "ind":
        return center(data, ind_mean)
    raise InvalidConfig(f"알 수 없는 센터링 기준: {choice}")


def prepare_vectors(backend: TrainedBackend, data: EmbeddingSet, center_eval: str = "ind") -> EmbeddingSet:
    """평가 데이터 전처리: LDA 적용 후 center_eval 평균 (기본 InD 평균)으로 센터링"""
    if backend.lda is not None:
        data = lda_apply(backend.lda, data)
    return _center_by(data, center_eval, backend.ood_mean, backend.ind_mean)


def adapt_backend(backend: TrainedBackend, recipe: AdaptRecipe, catalog: Optional[CovarianceCatalog] = None) -> PldaModel:
    """
    레시피로 적응 모델 생성

    평가 데이터는 InD 평균으로 센터링되므로 적응 모델의 평균은 원점

    Raises:
        MissingInDomainModel: 레시피가 InD PLDA를 요구하지만 없는 경우
    """
    catalog = catalog if catalog is not None else backend.catalog()
    return adapt_model(recipe, catalog, np.zeros(backend.dim))


def score_prepared(
    model: PldaModel,
    enroll: EmbeddingSet,
    test: EmbeddingSet,
    trials: TrialSet,
    cohort: Optional[EmbeddingSet] = None,
    options: ScoringOptions = ScoringOptions()
) -> TrialSet:
    """전처리된 데이터로 채점하고 코호트가 있으면 AS-norm 적용"""
    scored = score_trials(model, enroll, test, trials, workers=options.workers)
    if cohort is not None and len(scored) > 0:
        scored = as_norm(model, scored, enroll, test, cohort, options.snorm_k)
    return scored


def _available_recipes(backend: TrainedBackend, names: Sequence[str]) -> List[str]:
    if names:
        return list(names)
    if backend.plda_ind is not None:
        return list(PRESET_NAMES)
    available = [name for name in PRESET_NAMES if not preset(name, 0.5).needs_ind_model]
    logger.warning(f"InD PLDA 없음: 비지도 레시피만 sweep합니다 ({', '.join(available)})")
    return available


def sweep(
    backend: TrainedBackend,
    enroll: EmbeddingSet,
    test: EmbeddingSet,
    trials: TrialSet,
    config: PipelineConfig,
    cohort: Optional[EmbeddingSet] = None
) -> List[SweepRow]:
    """
    레시피 × 가중치 격자 평가

    카탈로그를 한 번 만들어 모든 (레시피, α) 조합이 공유하며,
    결과는 레시피 순서, α 순서로 정렬됨. 입력 데이터는 전처리된 상태여야 함

    Returns:
        SweepRow 목록
    """
    start_time = time.time()
    catalog = backend.catalog()
    # 의사 공분산을 미리 계산해 워커 간 공유
    _ = (catalog.pseudo_b, catalog.pseudo_w)

    names = _available_recipes(backend, config.recipes)
    tasks = [(name, alpha) for name in names for alpha in config.alpha_grid]
    for name in names:
        recipe = preset(name, 0.5)
        if recipe.needs_ind_model and not catalog.has_ind_model:
            raise MissingInDomainModel(f"{name} 레시피에는 InD PLDA가 필요합니다")

    serial = ScoringOptions(snorm_k=config.scoring.snorm_k, workers=1)

    def run(task: Tuple[str, float]) -> SweepRow:
        name, alpha = task
        model = adapt_backend(backend, preset(name, alpha), catalog)
        scored = score_prepared(model, enroll, test, trials, cohort, serial)
        report = evaluate(scored, config.cost)
        return SweepRow(alpha=alpha, recipe=name, eer=report.eer, min_cprimary=report.min_cprimary)

    with ThreadPoolExecutor(max_workers=config.scoring.workers) as executor:
        rows = list(executor.map(run, tasks))

    _log_baselines(backend, enroll, test, trials, config, cohort, rows)
    logger.info(f"sweep 완료: {len(names)}개 레시피 × {len(config.alpha_grid)}개 α ({time.time() - start_time:.2f}초)")
    return rows


def _log_baselines(backend, enroll, test, trials, config, cohort, rows: List[SweepRow]):
    """비적응 기준 시스템 성능과 각 행의 상대 개선율 로그"""
    baselines: Dict[str, MetricReport] = {}
    models = {"ood": backend.plda_ood, "ind": backend.plda_ind}
    for name, model in models.items():
        if model is None:
            continue
        centered = PldaModel(mu=np.zeros(backend.dim), phi_b=model.phi_b, phi_w=model.phi_w)
        scored = score_prepared(centered, enroll, test, trials, cohort, config.scoring)
        baselines[name] = evaluate(scored, config.cost)
        logger.info(
            f"기준 시스템 {name.upper()} PLDA: EER={baselines[name].eer:.4f}, "
            f"minC={baselines[name].min_cprimary:.4f}"
        )

    reference = baselines["ood"].min_cprimary
    for row in rows:
        gain = relative_reduction(reference, row.min_cprimary)
        logger.info(
            f"{row.recipe} α={row.alpha:g}: EER={row.eer:.4f}, minC={row.min_cprimary:.4f} "
            f"(OOD 대비 {100 * gain:.1f}% 감소)"
        )


# ----------------------------------------------------------------------
# 합성 설정
# ----------------------------------------------------------------------

def synth_config_from_values(values: Dict[str, str], base_dir: Optional[Path] = None) -> SynthConfig:
    """
    key-value 값으로 SynthConfig 구성

    phi_b_file / phi_w_file / shift_file / offset_file은 base_dir 기준 상대 경로 허용

    Raises:
        InvalidConfig: 알 수 없는 키 또는 값 형식 오류
    """
    base_dir = Path(base_dir) if base_dir is not None else Path(".")
    kwargs = {}
    for key, value in values.items():
        try:
            if key in SYNTH_INT_KEYS:
                kwargs[key] = int(value)
            elif key in SYNTH_FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key == "shift_mode":
                kwargs[key] = value
            elif key not in SYNTH_FILE_KEYS:
                raise InvalidConfig(f"알 수 없는 합성 설정 키: {key}")
        except ValueError:
            raise InvalidConfig(f"설정 값 형식이 잘못되었습니다: {key} = {value}")

    def resolve(key: str) -> Optional[Path]:
        return base_dir / values[key] if key in values else None

    if resolve("phi_b_file"):
        kwargs["phi_b_true"] = formats.read_symmatrix(resolve("phi_b_file"))
    if resolve("phi_w_file"):
        kwargs["phi_w_true"] = formats.read_symmatrix(resolve("phi_w_file"))
    if resolve("shift_file"):
        kwargs["shift_matrix"] = formats.read_matrix(resolve("shift_file"))
    if resolve("offset_file"):
        kwargs["shift_offset"] = formats.read_vector(resolve("offset_file"))
    return SynthConfig(**kwargs)


# ----------------------------------------------------------------------
# 파일 기반 서비스
# ----------------------------------------------------------------------

class PipelineService:
    """
    파일 기반 파이프라인 서비스

    CLI 하위 명령 하나가 메서드 하나에 대응. 모든 출력은 쓴 뒤 다시 읽어 형식을 검증함
    """

    def __init__(self, config: Optional[PipelineConfig] = None):
        """
        Args:
            config: 파이프라인 설정 (없으면 기본값)
        """
        self.config = config or PipelineConfig()

    def _stage(self, stage: PipelineStage, message: str):
        logger.info(f"[{stage.value}] {message}")

    def train(self, ood_path: str, ind_path: str, model_dir: str) -> TrainedBackend:
        """OOD/InD 임베딩 파일로 백엔드를 학습해 model_dir에 저장"""
        self._stage(PipelineStage.TRAIN, f"OOD={ood_path}, InD={ind_path} → {model_dir}")
        ood = formats.read_embeddings(ood_path)
        ind = formats.read_embeddings(ind_path)
        backend = train_backend(ood, ind, self.config.lda_dim, self.config.lda_source, self.config.center_ood)

        repository = DirectoryBackendRepository(model_dir)
        repository.save(backend)
        repository.load()
        return backend

    def adapt(self, model_dir: str, recipe: AdaptRecipe, out_path: str) -> PldaModel:
        """저장된 백엔드로 적응 모델 파일 생성"""
        self._stage(PipelineStage.ADAPT, f"{recipe.describe()} → {out_path}")
        backend = DirectoryBackendRepository(model_dir).load()
        model = adapt_backend(backend, recipe)
        formats.write_plda(out_path, model)
        formats.read_plda(out_path)
        return model

    def score(
        self,
        model_dir: str,
        enroll_path: str,
        test_path: str,
        trials_path: str,
        out_path: str,
        model_path: Optional[str] = None,
        cohort_path: Optional[str] = None
    ) -> TrialSet:
        """
        trial 파일 채점

        model_path가 없으면 model_dir의 OOD PLDA로 채점.
        cohort_path가 있으면 AS-norm 적용
        """
        self._stage(PipelineStage.SCORE, f"{trials_path} → {out_path}")
        backend = DirectoryBackendRepository(model_dir).load()
        if model_path is not None:
            model = formats.read_plda(model_path)
        else:
            model = PldaModel(mu=np.zeros(backend.dim), phi_b=backend.plda_ood.phi_b, phi_w=backend.plda_ood.phi_w)

        trials = formats.read_trials(trials_path)
        enroll = prepare_vectors(backend, formats.read_embeddings(enroll_path), self.config.center_eval)
        test = prepare_vectors(backend, formats.read_embeddings(test_path), self.config.center_eval)
        cohort = None
        if cohort_path is not None:
            self._stage(PipelineStage.NORMALIZE, f"코호트 {cohort_path}, top-{self.config.scoring.snorm_k}")
            cohort = prepare_vectors(backend, formats.read_embeddings(cohort_path), self.config.center_eval)

        scored = score_prepared(model, enroll, test, trials, cohort, self.config.scoring)
        formats.write_trials(out_path, scored)
        formats.read_trials(out_path)
        return scored

    def evaluate(
        self,
        scores_path: str,
        out_path: Optional[str] = None,
        det_path: Optional[str] = None
    ) -> MetricReport:
        """채점된 trial 파일 평가"""
        self._stage(PipelineStage.EVALUATE, scores_path)
        trials = formats.read_trials(scores_path)
        report = evaluate(trials, self.config.cost)
        if out_path is not None:
            formats.write_report(out_path, report)
            formats.read_report(out_path)
        if det_path is not None:
            formats.write_det_tsv(det_path, error_curve(trials))
        return report

    def sweep(
        self,
        model_dir: str,
        enroll_path: str,
        test_path: str,
        trials_path: str,
        out_path: str,
        cohort_path: Optional[str] = None
    ) -> List[SweepRow]:
        """레시피 × α 격자 평가 결과를 TSV로 저장"""
        self._stage(PipelineStage.SWEEP, f"α 격자 {len(self.config.alpha_grid)}개 → {out_path}")
        backend = DirectoryBackendRepository(model_dir).load()
        trials = formats.read_trials(trials_path)
        enroll = prepare_vectors(backend, formats.read_embeddings(enroll_path), self.config.center_eval)
        test = prepare_vectors(backend, formats.read_embeddings(test_path), self.config.center_eval)
        cohort = None
        if cohort_path is not None:
            cohort = prepare_vectors(backend, formats.read_embeddings(cohort_path), self.config.center_eval)

        rows = sweep(backend, enroll, test, trials, self.config, cohort)
        formats.write_sweep_tsv(out_path, [(r.alpha, r.recipe, r.eer, r.min_cprimary) for r in rows])
        formats.read_sweep_tsv(out_path)
        return rows

    def synth(self, config: SynthConfig, out_dir: str) -> Dict[str, Path]:
        """
        합성 코퍼스와 정답 행렬 파일 생성

        Returns:
            {이름: 경로} 딕셔너리
        """
        self._stage(PipelineStage.SYNTH, f"seed={config.seed} → {out_dir}")
        out = Path(out_dir)
        ood, ind, truth_catalog = generate(config)
        split = generate_evaluation(config)
        truth = resolve_truth(config)

        written = {
            "ood": formats.write_embeddings(out / "ood.txt", ood),
            "ind": formats.write_embeddings(out / "ind.txt", ind),
            "ind_unlabeled": formats.write_embeddings(out / "ind_unlabeled.txt", ind.without_labels()),
            "enroll": formats.write_embeddings(out / "enroll.txt", split.enroll),
            "test": formats.write_embeddings(out / "test.txt", split.test),
            "trials": formats.write_trials(out / "trials.txt", split.trials),
            "truth_phi_b": formats.write_symmatrix(out / "truth_phi_b.txt", truth.phi_b),
            "truth_phi_w": formats.write_symmatrix(out / "truth_phi_w.txt", truth.phi_w),
            "truth_shift": formats.write_matrix(out / "truth_shift.txt", truth.shift_matrix),
            "truth_offset": formats.write_vector(out / "truth_offset.txt", truth.shift_offset),
            "truth_c_ind": formats.write_symmatrix(out / "truth_c_ind.txt", truth_catalog.c_i),
        }
        if len(split.cohort) > 0:
            written["cohort"] = formats.write_embeddings(out / "cohort.txt", split.cohort)

        for name in ("ood", "ind", "enroll", "test"):
            formats.read_embeddings(written[name])
        formats.read_trials(written["trials"])
        logger.info(f"합성 파일 {len(written)}개 저장: {out}")
        return written
