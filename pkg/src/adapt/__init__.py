"""
도메인 적응 모듈
CORAL 의사 공분산, Γ_max 정규화, 일반화 적응 공식과 프리셋
"""
from src.adapt.coral import coral_pseudo, gamma_max
from src.adapt.recipe import AdaptRecipe, CovRole, RoleKind, parse_role, preset, PRESET_NAMES
from src.adapt.catalog import CovarianceCatalog
from src.adapt.adapter import adapt_covariance, adapt_model

__all__ = [
    'coral_pseudo',
    'gamma_max',
    'AdaptRecipe',
    'CovRole',
    'RoleKind',
    'parse_role',
    'preset',
    'PRESET_NAMES',
    'CovarianceCatalog',
    'adapt_covariance',
    'adapt_model',
]
