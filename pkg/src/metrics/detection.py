"""
검증 성능 지표
오류율 곡선, EER, 최소 검출 비용 (minC_primary)

임계값 규칙: score ≥ θ 이면 수락 (동점은 수락)
"""
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.domain.entities import CostParams, TrialSet


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ErrorCurve:
    """
    임계값별 오류율

    Attributes:
        thresholds: 후보 임계값 (−∞, 고유 점수들, +∞ 오름차순)
        p_miss: target 점수 < θ 비율 (비감소)
        p_fa: nontarget 점수 ≥ θ 비율 (비증가)
    """
    thresholds: np.ndarray
    p_miss: np.ndarray
    p_fa: np.ndarray

    def points(self) -> List[Tuple[float, float, float]]:
        return [
            (float(t), float(m), float(f))
            for t, m, f in zip(self.thresholds, self.p_miss, self.p_fa)
        ]


@dataclass(frozen=True)
class MetricReport:
    """평가 결과"""
    eer: float
    min_cprimary: float
    n_targets: int
    n_nontargets: int


def curve_from_scores(targets: np.ndarray, nontargets: np.ndarray) -> ErrorCurve:
    """target/nontarget 점수 배열에서 오류율 곡선 계산"""
    targets = np.sort(np.asarray(targets, dtype=np.float64))
    nontargets = np.sort(np.asarray(nontargets, dtype=np.float64))

    scores = np.unique(np.concatenate([targets, nontargets]))
    thresholds = np.concatenate([[-np.inf], scores, [np.inf]])

    # searchsorted(left) = θ 미만인 점수 개수
    p_miss = np.searchsorted(targets, thresholds, side="left") / len(targets)
    p_fa = (len(nontargets) - np.searchsorted(nontargets, thresholds, side="left")) / len(nontargets)
    return ErrorCurve(thresholds=thresholds, p_miss=p_miss, p_fa=p_fa)


def error_curve(trials: TrialSet) -> ErrorCurve:
    """
    trial 목록의 오류율 곡선

    Raises:
        NoTargets / NoNontargets: 한쪽 클래스가 없는 경우
    """
    targets, nontargets = trials.split_scores()
    return curve_from_scores(targets, nontargets)


def eer_from_curve(curve: ErrorCurve) -> float:
    """p_miss − p_fa 부호가 바뀌는 두 점 사이 선형 보간"""
    diff = curve.p_miss - curve.p_fa
    i = int(np.argmax(diff >= 0))
    if diff[i] == 0 or i == 0:
        return float(curve.p_miss[i])

    lo, hi = diff[i - 1], diff[i]
    weight = lo / (lo - hi)
    return float(curve.p_miss[i - 1] + weight * (curve.p_miss[i] - curve.p_miss[i - 1]))


def min_cprimary_from_curve(curve: ErrorCurve, params: CostParams) -> float:
    """p_target별 정규화 비용의 최솟값 평균"""
    costs = []
    for p_target in params.p_targets:
        weighted_miss = params.c_miss * p_target
        weighted_fa = params.c_fa * (1.0 - p_target)
        detection_cost = weighted_miss * curve.p_miss + weighted_fa * curve.p_fa
        costs.append(float(np.min(detection_cost)) / min(weighted_miss, weighted_fa))
    return float(np.mean(costs))


def eer(trials: TrialSet) -> float:
    """
    동일 오류율 (EER)

    Returns:
        [0, 1] 범위 값
    """
    return eer_from_curve(error_curve(trials))


def min_cprimary(trials: TrialSet, params: CostParams = CostParams()) -> float:
    """
    최소 검출 비용

    각 p_target마다 C(θ) = c_miss·p·P_miss(θ) + c_fa·(1−p)·P_fa(θ)를
    min(c_miss·p, c_fa·(1−p))로 정규화한 뒤 θ에 대해 최소화하고 평균

    Args:
        trials: 레이블과 점수가 있는 trial 목록
        params: 비용 파라미터 (기본값: p_target 0.01, 0.005)

    Returns:
        0 이상의 비용 (항상 1 이하)
    """
    return min_cprimary_from_curve(error_curve(trials), params)


def evaluate(trials: TrialSet, params: CostParams = CostParams()) -> MetricReport:
    """EER과 minC_primary를 한 번에 계산"""
    targets, nontargets = trials.split_scores()
    curve = curve_from_scores(targets, nontargets)
    report = MetricReport(
        eer=eer_from_curve(curve),
        min_cprimary=min_cprimary_from_curve(curve, params),
        n_targets=len(targets),
        n_nontargets=len(nontargets),
    )
    logger.debug(
        f"평가: target {report.n_targets}개, nontarget {report.n_nontargets}개, "
        f"EER={report.eer:.4f}, minC={report.min_cprimary:.4f}"
    )
    return report


def relative_reduction(baseline: float, system: float) -> float:
    """
    기준 시스템 대비 상대 감소율 (baseline − system) / baseline

    기준값이 0이면 NaN
    """
    if baseline == 0:
        return float("nan")
    return (baseline - system) / baseline
