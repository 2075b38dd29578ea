"""
PLDA 도메인 적응
Φ⁺ = αΦ_0 + (1−α)Γ_max(Φ_1, Φ_2)를 화자 간/내 공분산에 각각 적용
"""
import logging

import numpy as np

from src.adapt.catalog import BETWEEN, WITHIN, CovarianceCatalog
from src.adapt.coral import gamma_max, gamma_max_split
from src.adapt.recipe import AdaptRecipe, RoleKind
from src.domain.errors import InvalidRecipe, MissingInDomainModel
from src.linalg.symmat import SymMatrix
from src.plda.model import PldaModel


logger = logging.getLogger(__name__)


def _regularized_term(recipe: AdaptRecipe, catalog: CovarianceCatalog, which: str) -> SymMatrix:
    """Γ_max(Φ_1, Φ_2) 항"""
    phi1, phi2 = recipe.phi1, recipe.phi2

    if phi1.is_total or phi2.is_total:
        # 전체 공분산 수준 Γ_max는 OOD 화자 간/내 비율로 나눠서 돌려줌
        if not (phi1.is_total and phi2.kind == RoleKind.OOD_TOTAL_PLDA):
            raise InvalidRecipe(
                "전체 공분산 역할은 Φ_1=TOTAL_*, Φ_2=OOD_TOTAL_PLDA 조합으로만 쓸 수 있습니다"
            )
        developer = catalog.resolve(phi1, which)
        between, within = gamma_max_split(
            developer, catalog.ood_total_plda, catalog.phi_o_b, catalog.phi_o_w
        )
        return between if which == BETWEEN else within

    developer = catalog.resolve(phi1, which)
    if phi1 == phi2:
        return developer
    reference = catalog.resolve(phi2, which)
    if developer.equals(reference):
        return developer
    return gamma_max(developer, reference)


def adapt_covariance(recipe: AdaptRecipe, catalog: CovarianceCatalog, which: str) -> SymMatrix:
    """
    단일 공분산 적응

    Args:
        recipe: 적응 레시피
        catalog: 공분산 카탈로그
        which: "between" 또는 "within"

    Returns:
        α·Φ_0 + (1−α)·Γ_max(Φ_1, Φ_2)
        (α=1이면 Φ_0, α=0이면 Γ_max 항 그대로)

    Raises:
        MissingInDomainModel: 레시피가 요구하는 InD PLDA가 없는 경우
    """
    if recipe.needs_ind_model and not catalog.has_ind_model:
        raise MissingInDomainModel(f"{recipe.name} 레시피에는 InD PLDA가 필요합니다")

    alpha = recipe.alpha_for(which)
    base = catalog.resolve(recipe.phi0, which)
    if alpha == 1.0:
        return base

    term = _regularized_term(recipe, catalog, which)
    if alpha == 0.0:
        return term
    return SymMatrix(alpha * base.entries + (1.0 - alpha) * term.entries)


def adapt_model(recipe: AdaptRecipe, catalog: CovarianceCatalog, mu: np.ndarray) -> PldaModel:
    """
    PLDA 모델 적응

    화자 간/내 공분산을 각각 adapt_covariance로 적응하고 평균은 InD 평균을 사용

    Args:
        recipe: 적응 레시피
        catalog: 공분산 카탈로그
        mu: InD 평균 벡터

    Returns:
        적응된 PldaModel
    """
    phi_b = adapt_covariance(recipe, catalog, BETWEEN)
    phi_w = adapt_covariance(recipe, catalog, WITHIN)
    logger.info(
        f"모델 적응 완료 ({recipe.describe()}): "
        f"tr Φ_b={phi_b.trace():.4g}, tr Φ_w={phi_w.trace():.4g}"
    )
    return PldaModel(mu=mu, phi_b=phi_b, phi_w=phi_w)
