"""
성능 지표 테스트
오류율 곡선, EER, minC_primary (전수 임계값 오라클과 비교)
"""
import math
from typing import List, Sequence, Tuple

import numpy as np
import pytest

from src.domain.entities import CostParams, Trial, TrialLabel, TrialSet
from src.domain.errors import InvalidConfig, NoNontargets, NoTargets
from src.metrics.detection import (
    eer,
    error_curve,
    evaluate,
    min_cprimary,
    relative_reduction,
)


def make_trials(targets: Sequence[float], nontargets: Sequence[float]) -> TrialSet:
    trials = [
        Trial(f"e{i}", f"t{i}", TrialLabel.TARGET, float(s)) for i, s in enumerate(targets)
    ]
    trials += [
        Trial(f"e{i}", f"n{i}", TrialLabel.NONTARGET, float(s)) for i, s in enumerate(nontargets)
    ]
    return TrialSet(trials)


def oracle_points(targets, nontargets) -> List[Tuple[float, float]]:
    """모든 후보 임계값에서 (p_miss, p_fa)를 직접 센 값"""
    candidates = [-math.inf] + sorted(set(targets) | set(nontargets)) + [math.inf]
    points = []
    for theta in candidates:
        misses = sum(1 for s in targets if s < theta)
        false_alarms = sum(1 for s in nontargets if s >= theta)
        points.append((misses / len(targets), false_alarms / len(nontargets)))
    return points


def oracle_eer(targets, nontargets) -> float:
    points = oracle_points(targets, nontargets)
    for (m0, f0), (m1, f1) in zip(points, points[1:]):
        d0, d1 = m0 - f0, m1 - f1
        if d0 >= 0:
            return m0
        if d1 >= 0:
            if d1 == 0:
                return m1
            return m0 + d0 / (d0 - d1) * (m1 - m0)
    raise AssertionError("p_miss − p_fa 부호가 바뀌지 않음")


def oracle_min_cprimary(targets, nontargets, params: CostParams) -> float:
    points = oracle_points(targets, nontargets)
    costs = []
    for p in params.p_targets:
        norm = min(params.c_miss * p, params.c_fa * (1 - p))
        best = min(params.c_miss * p * m + params.c_fa * (1 - p) * f for m, f in points)
        costs.append(best / norm)
    return sum(costs) / len(costs)


@pytest.fixture
def fixture_20():
    """고정 20점 fixture (target 8개, nontarget 12개, 동점 포함)"""
    targets = [2.1, 0.4, 1.7, 3.3, -0.2, 1.1, 2.1, 0.9]
    nontargets = [-1.5, 0.4, -0.3, 1.2, -2.2, 0.0, -0.9, 1.8, -1.1, 0.6, -0.5, 0.4]
    return targets, nontargets


# ============================================================================
# 오류율 곡선 테스트
# ============================================================================

class TestErrorCurve:
    """오류율 곡선 테스트"""

    def test_separable_has_perfect_point(self):
        """분리 가능한 점수면 (0, 0) 지점이 존재"""
        curve = error_curve(make_trials([2.0, 3.0], [0.0, 1.0]))

        assert any(m == 0.0 and f == 0.0 for m, f in zip(curve.p_miss, curve.p_fa))

    def test_all_scores_equal(self):
        """모든 점수가 같으면 (0,1)과 (1,0)만 존재"""
        curve = error_curve(make_trials([1.0, 1.0], [1.0, 1.0, 1.0]))

        assert set(zip(curve.p_miss, curve.p_fa)) == {(0.0, 1.0), (1.0, 0.0)}

    def test_thresholds_include_infinities(self):
        """후보 임계값은 −∞, 고유 점수, +∞"""
        curve = error_curve(make_trials([1.0, 2.0], [2.0, 0.5]))

        assert list(curve.thresholds) == [-np.inf, 0.5, 1.0, 2.0, np.inf]

    def test_monotone(self, fixture_20):
        """p_miss 비감소, p_fa 비증가"""
        curve = error_curve(make_trials(*fixture_20))

        assert np.all(np.diff(curve.p_miss) >= 0)
        assert np.all(np.diff(curve.p_fa) <= 0)

    def test_matches_oracle(self):
        """무작위 50개 trial: 전수 계산과 일치"""
        rng = np.random.default_rng(5)
        targets = list(np.round(rng.normal(1.0, 1.0, 20), 1))
        nontargets = list(np.round(rng.normal(-1.0, 1.0, 30), 1))

        curve = error_curve(make_trials(targets, nontargets))

        assert [(m, f) for _, m, f in curve.points()] == oracle_points(targets, nontargets)

    def test_ties_count_as_accepts(self):
        """score == θ 는 수락"""
        curve = error_curve(make_trials([1.0], [1.0]))

        index = list(curve.thresholds).index(1.0)
        assert curve.p_miss[index] == 0.0
        assert curve.p_fa[index] == 1.0

    def test_no_targets(self):
        """target이 없으면 NoTargets"""
        with pytest.raises(NoTargets):
            error_curve(make_trials([], [1.0]))

    def test_no_nontargets(self):
        """nontarget이 없으면 NoNontargets"""
        with pytest.raises(NoNontargets):
            error_curve(make_trials([1.0], []))

    def test_unscored_trial(self):
        """점수 없는 trial이 있으면 InvalidConfig"""
        trials = TrialSet([Trial("a", "b", TrialLabel.TARGET), Trial("a", "c", TrialLabel.NONTARGET, 0.0)])

        with pytest.raises(InvalidConfig):
            error_curve(trials)


# ============================================================================
# EER 테스트
# ============================================================================

class TestEer:
    """동일 오류율 테스트"""

    def test_separable(self):
        """분리 가능 → 0"""
        assert eer(make_trials([2.0, 3.0], [0.0, 1.0])) == 0.0

    def test_identical_distributions(self):
        """target과 nontarget 점수가 같은 다중집합 → 0.5"""
        scores = [1.0, 2.0, 3.0, 4.0]

        assert eer(make_trials(scores, scores)) == pytest.approx(0.5)

    def test_all_equal(self):
        """모든 점수가 같으면 0.5"""
        assert eer(make_trials([0.0] * 3, [0.0] * 5)) == pytest.approx(0.5)

    def test_fixture_matches_oracle(self, fixture_20):
        """고정 fixture: 오라클과 1e-12 이내"""
        assert eer(make_trials(*fixture_20)) == pytest.approx(oracle_eer(*fixture_20), abs=1e-12)

    def test_interpolates_between_points(self):
        """부호가 바뀌는 두 점 사이를 선형 보간"""
        # θ=1.5: (1/2, 2/3), θ=2.5: (1/2, 1/3)
        value = eer(make_trials([1.0, 3.0], [0.0, 1.5, 2.5]))

        assert value == pytest.approx(oracle_eer([1.0, 3.0], [0.0, 1.5, 2.5]), abs=1e-12)
        assert value == pytest.approx(0.5)


# ============================================================================
# minC_primary 테스트
# ============================================================================

class TestMinCprimary:
    """최소 검출 비용 테스트"""

    def test_separable(self):
        """분리 가능 → 0"""
        assert min_cprimary(make_trials([2.0, 3.0], [0.0, 1.0])) == 0.0

    def test_all_equal(self):
        """모든 점수가 같으면 1 (모두 거부가 최적)"""
        assert min_cprimary(make_trials([0.5] * 4, [0.5] * 6)) == pytest.approx(1.0)

    def test_fixture_matches_oracle(self, fixture_20):
        """고정 fixture, 기본 파라미터: 오라클과 1e-12 이내"""
        params = CostParams()

        value = min_cprimary(make_trials(*fixture_20), params)

        assert value == pytest.approx(oracle_min_cprimary(*fixture_20, params), abs=1e-12)

    def test_custom_costs(self, fixture_20):
        """비용 파라미터 변경"""
        params = CostParams(p_targets=(0.05, 0.5), c_miss=10.0, c_fa=1.0)

        value = min_cprimary(make_trials(*fixture_20), params)

        assert value == pytest.approx(oracle_min_cprimary(*fixture_20, params), abs=1e-12)

    def test_bounded_by_one(self):
        """항상 1 이하"""
        rng = np.random.default_rng(8)
        for _ in range(20):
            targets = rng.normal(0.0, 1.0, 10)
            nontargets = rng.normal(0.5, 1.0, 40)
            assert min_cprimary(make_trials(targets, nontargets)) <= 1.0 + 1e-12


# ============================================================================
# 불변성 / 오라클 일괄 테스트
# ============================================================================

class TestMetricProperties:
    """지표 불변성 테스트"""

    def test_random_fixtures_match_oracle(self):
        """무작위 fixture 50개: EER, minC 모두 오라클과 일치"""
        rng = np.random.default_rng(17)
        params = CostParams()
        for _ in range(50):
            n_t = int(rng.integers(1, 30))
            n_n = int(rng.integers(1, 60))
            targets = list(np.round(rng.normal(1.0, 1.5, n_t), 2))
            nontargets = list(np.round(rng.normal(-0.5, 1.5, n_n), 2))
            trials = make_trials(targets, nontargets)

            assert eer(trials) == pytest.approx(oracle_eer(targets, nontargets), abs=1e-12)
            assert min_cprimary(trials, params) == pytest.approx(
                oracle_min_cprimary(targets, nontargets, params), abs=1e-12
            )

    def test_monotone_transform_invariance(self):
        """증가 함수를 적용해도 지표 불변"""
        rng = np.random.default_rng(23)
        targets = rng.normal(1.0, 1.0, 40)
        nontargets = rng.normal(-1.0, 1.0, 200)
        original = evaluate(make_trials(targets, nontargets))

        for transform in (lambda s: 3.0 * s + 7.0, lambda s: np.exp(0.5 * s), lambda s: s ** 3):
            mapped = evaluate(make_trials(transform(targets), transform(nontargets)))
            assert mapped.eer == pytest.approx(original.eer, abs=1e-12)
            assert mapped.min_cprimary == pytest.approx(original.min_cprimary, abs=1e-12)

    def test_order_and_duplication_invariance(self, fixture_20):
        """trial 순서 변경과 전체 복제에 불변"""
        trials = make_trials(*fixture_20)
        reversed_trials = TrialSet(list(reversed(trials.trials)))
        doubled = TrialSet(trials.trials + trials.trials)

        base = evaluate(trials)
        for other in (reversed_trials, doubled):
            report = evaluate(other)
            assert report.eer == pytest.approx(base.eer, abs=1e-12)
            assert report.min_cprimary == pytest.approx(base.min_cprimary, abs=1e-12)

    def test_evaluate_counts(self, fixture_20):
        """리포트에 trial 수 포함"""
        report = evaluate(make_trials(*fixture_20))

        assert report.n_targets == 8
        assert report.n_nontargets == 12
        assert 0.0 <= report.eer <= 1.0


class TestRelativeReduction:
    """상대 감소율 테스트"""

    def test_reduction(self):
        """(0.2 − 0.15) / 0.2 = 0.25"""
        assert relative_reduction(0.2, 0.15) == pytest.approx(0.25)

    def test_zero_baseline(self):
        """기준값 0이면 NaN"""
        assert math.isnan(relative_reduction(0.0, 0.1))
