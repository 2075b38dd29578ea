"""
인수 테스트 (느림)
대규모 Γ_max 분산 보장, 표본 기반 CORAL 복원, 여러 seed에서의 성능 경향

기본 실행에서는 제외됨: `pytest -m slow` 로 실행
"""
from typing import Dict

import numpy as np
import pytest

from src.adapt.coral import coral_pseudo, gamma_max
from src.adapt.recipe import PRESET_NAMES
from src.linalg.symmat import SymMatrix
from src.metrics.detection import evaluate
from src.plda.model import PldaModel, total_covariance
from src.plda.scorer import score_trials
from src.preprocess.centering import center, compute_mean
from src.service.pipeline_service import (
    PipelineConfig,
    ScoringOptions,
    prepare_vectors,
    sweep,
    train_backend,
)
from src.synthgen.generator import SynthConfig, generate, generate_evaluation


pytestmark = pytest.mark.slow

SEEDS = (1, 2, 3, 4, 5)
ALPHA_GRID = tuple(round(0.1 * i, 10) for i in range(11))


def random_spd(rng, dim):
    x = rng.standard_normal((dim, dim))
    return SymMatrix(x @ x.T / dim + 1e-3 * np.eye(dim))


def rel_frobenius(a: np.ndarray, b: np.ndarray) -> float:
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def shifted_corpus_config(seed: int) -> SynthConfig:
    return SynthConfig(
        dim=32,
        n_speakers_ood=500, utts_per_speaker_ood=10,
        n_speakers_ind=60, utts_per_speaker_ind=10,
        n_speakers_eval=100, utts_per_speaker_eval=4,
        n_cohort=0, seed=seed,
    )


def run_corpus(seed: int):
    """
    seed 하나에 대해 학습 후 sweep

    Returns:
        (OOD PLDA 지표, {(레시피, α): SweepRow}) 튜플
    """
    config = shifted_corpus_config(seed)
    ood, ind, _ = generate(config)
    split = generate_evaluation(config)
    backend = train_backend(ood, ind, lda_dim=0)
    enroll = prepare_vectors(backend, split.enroll)
    test = prepare_vectors(backend, split.test)

    pipeline = PipelineConfig(
        lda_dim=0, alpha_grid=ALPHA_GRID, scoring=ScoringOptions(workers=4), recipes=PRESET_NAMES,
    )
    rows = sweep(backend, enroll, test, split.trials, pipeline)

    ood_model = PldaModel(mu=np.zeros(backend.dim), phi_b=backend.plda_ood.phi_b, phi_w=backend.plda_ood.phi_w)
    baseline = evaluate(score_trials(ood_model, enroll, test, split.trials))
    return baseline, {(row.recipe, row.alpha): row for row in rows}


@pytest.fixture(scope="module")
def corpus_results() -> Dict[int, tuple]:
    return {seed: run_corpus(seed) for seed in SEEDS}


# ============================================================================
# Γ_max 분산 보장
# ============================================================================

class TestGammaMaxGuarantee:
    """Γ_max 분산 증가 보장 테스트"""

    def test_random_pairs(self):
        """SPD 쌍 100개 (최대 150차원): G − Y, G − Z 모두 PSD"""
        rng = np.random.default_rng(100)
        for dim in np.linspace(2, 150, 100).astype(int):
            y = random_spd(rng, dim)
            z = random_spd(rng, dim)

            g = gamma_max(y, z)

            scale = max(1.0, g.trace() / dim)
            assert (g - y).min_eigval() >= -1e-9 * scale
            assert (g - z).min_eigval() >= -1e-9 * scale


# ============================================================================
# CORAL 복원
# ============================================================================

class TestCoralRecovery:
    """대칭 선형 이동에서 CORAL 의사 공분산 복원 테스트"""

    @pytest.fixture
    def isotropic_config(self) -> SynthConfig:
        """Φ_b + Φ_w = 2I 이고 A가 대칭 PSD인 설정"""
        rng = np.random.default_rng(7)
        diag = rng.uniform(0.3, 1.5, 8)
        return SynthConfig(
            dim=8,
            n_speakers_ood=1000, utts_per_speaker_ood=4,
            n_speakers_ind=1000, utts_per_speaker_ind=4,
            phi_b_true=SymMatrix.diag(diag),
            phi_w_true=SymMatrix.diag(2.0 - diag),
            shift_mode="symmetric",
            seed=8,
        )

    def test_population_level_exact(self, isotropic_config):
        """모집단 통계로는 A·Φ·Aᵀ를 1e-9 이내로 복원"""
        _, _, truth = generate(isotropic_config)

        pseudo = coral_pseudo(truth.phi_o_w, truth.c_o, truth.c_i)

        assert np.allclose(pseudo.entries, truth.phi_i_w.entries, atol=1e-9)

    def test_sample_estimates(self, isotropic_config):
        """4000개 표본의 전체 공분산으로 10% 이내 복원"""
        ood, ind, truth = generate(isotropic_config)

        c_o = total_covariance(center(ood, compute_mean(ood)))
        c_i = total_covariance(center(ind, compute_mean(ind)))
        pseudo = coral_pseudo(truth.phi_o_w, c_o, c_i)

        assert len(ood) == 4000
        assert rel_frobenius(pseudo.entries, truth.phi_i_w.entries) < 0.10


# ============================================================================
# 성능 경향
# ============================================================================

class TestTrends:
    """도메인 이동 합성 코퍼스 5개에서의 경향 테스트"""

    def test_adapted_models_beat_ood(self, corpus_results):
        """α = 0.5 의 모든 적응 모델이 OOD PLDA보다 minC가 낮음 (5개 중 4개 이상)"""
        wins = 0
        for baseline, results in corpus_results.values():
            if all(results[(name, 0.5)].min_cprimary < baseline.min_cprimary for name in PRESET_NAMES):
                wins += 1

        assert wins >= 4

    def test_cip_reg_not_worse_than_lip(self, corpus_results):
        """α = 0.5 에서 CIP-reg ≤ LIP (5개 중 4개 이상)"""
        wins = sum(
            1 for _, results in corpus_results.values()
            if results[("cip_reg", 0.5)].min_cprimary <= results[("lip", 0.5)].min_cprimary
        )

        assert wins >= 4

    @pytest.mark.parametrize("regularized,plain", [("lip_reg", "lip"), ("cip_reg", "cip")])
    def test_regularized_robust_to_alpha(self, corpus_results, regularized, plain):
        """α 격자 전체에서 정규화 변형의 minC 폭이 더 좁음 (5개 중 4개 이상)"""
        def spread(results, name):
            values = [results[(name, alpha)].min_cprimary for alpha in ALPHA_GRID]
            return max(values) - min(values)

        wins = sum(
            1 for _, results in corpus_results.values()
            if spread(results, regularized) < spread(results, plain)
        )

        assert wins >= 4

    def test_coral_plus_lowers_eer(self, corpus_results):
        """α = 0.5 의 CORAL+ 가 OOD PLDA보다 EER이 낮음 (5개 중 4개 이상)"""
        wins = sum(
            1 for baseline, results in corpus_results.values()
            if results[("coral_plus", 0.5)].eer < baseline.eer
        )

        assert wins >= 4
