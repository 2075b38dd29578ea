"""
적응 레시피
일반화 공식 Φ⁺ = αΦ_0 + (1−α)Γ_max(Φ_1, Φ_2)의 역할 선택과 프리셋
"""
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

from src.domain.errors import InvalidRecipe, UnknownPreset


class RoleKind(Enum):
    """공분산 역할 종류"""
    OOD = "OOD"                        # OOD PLDA 공분산
    IND = "IND"                        # InD PLDA 공분산
    PSEUDO = "PSEUDO"                  # CORAL 의사 InD 공분산
    TOTAL_OOD = "TOTAL_OOD"            # OOD 전체 공분산 C_O
    TOTAL_IND = "TOTAL_IND"            # InD 전체 공분산 C_I
    OOD_TOTAL_PLDA = "OOD_TOTAL_PLDA"  # Φ_O_b + Φ_O_w
    GAMMA = "GAMMA"                    # Γ_max(첫째, 둘째)


@dataclass(frozen=True)
class CovRole:
    """
    공분산 역할

    Attributes:
        kind: 역할 종류
        first: GAMMA의 첫 번째 인자
        second: GAMMA의 두 번째 인자
    """
    kind: RoleKind
    first: Optional['CovRole'] = None
    second: Optional['CovRole'] = None

    def __post_init__(self):
        is_gamma = self.kind == RoleKind.GAMMA
        has_args = self.first is not None and self.second is not None
        if is_gamma != has_args:
            raise InvalidRecipe("GAMMA 역할만 두 개의 인자를 가집니다")
        if is_gamma and (self.first.depth > 0 or self.second.depth > 0):
            raise InvalidRecipe("GAMMA 중첩 깊이는 1 이하여야 합니다")

    @property
    def depth(self) -> int:
        """GAMMA 중첩 깊이"""
        if self.kind != RoleKind.GAMMA:
            return 0
        return 1 + max(self.first.depth, self.second.depth)

    @property
    def is_total(self) -> bool:
        """전체 공분산 수준 역할 여부 (화자 간/내 구분 없음)"""
        return self.kind in (RoleKind.TOTAL_OOD, RoleKind.TOTAL_IND, RoleKind.OOD_TOTAL_PLDA)

    @property
    def needs_ind_model(self) -> bool:
        """InD PLDA 필요 여부"""
        if self.kind == RoleKind.GAMMA:
            return self.first.needs_ind_model or self.second.needs_ind_model
        return self.kind == RoleKind.IND

    def __str__(self) -> str:
        if self.kind == RoleKind.GAMMA:
            return f"GAMMA({self.first},{self.second})"
        return self.kind.value


OOD = CovRole(RoleKind.OOD)
IND = CovRole(RoleKind.IND)
PSEUDO = CovRole(RoleKind.PSEUDO)
TOTAL_OOD = CovRole(RoleKind.TOTAL_OOD)
TOTAL_IND = CovRole(RoleKind.TOTAL_IND)
OOD_TOTAL_PLDA = CovRole(RoleKind.OOD_TOTAL_PLDA)


def gamma(first: CovRole, second: CovRole) -> CovRole:
    """GAMMA 역할 생성"""
    return CovRole(RoleKind.GAMMA, first, second)


_GAMMA_PATTERN = re.compile(r"^GAMMA\((?P<args>.+)\)$")


def parse_role(text: str) -> CovRole:
    """
    역할 문자열 파싱

    Args:
        text: "OOD", "PSEUDO", "GAMMA(PSEUDO,OOD)" 등

    Returns:
        CovRole

    Raises:
        InvalidRecipe: 형식이 잘못된 경우
    """
    cleaned = text.strip().upper().replace(" ", "")
    match = _GAMMA_PATTERN.match(cleaned)
    if match:
        args = match.group("args")
        # 최상위 쉼표 위치 찾기
        depth = 0
        for i, ch in enumerate(args):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                return gamma(parse_role(args[:i]), parse_role(args[i + 1:]))
        raise InvalidRecipe(f"GAMMA 인자가 2개여야 합니다: {text}")

    try:
        kind = RoleKind(cleaned)
    except ValueError:
        raise InvalidRecipe(f"알 수 없는 공분산 역할: {text}")
    if kind == RoleKind.GAMMA:
        raise InvalidRecipe("GAMMA는 인자가 필요합니다")
    return CovRole(kind)


@dataclass(frozen=True)
class AdaptRecipe:
    """
    적응 레시피 (Φ0, Φ1, Φ2, α 한 조합)

    Attributes:
        phi0: base 공분산 역할
        phi1: developer 공분산 역할
        phi2: reference 공분산 역할
        alpha: 보간 가중치 [0, 1]
        alpha_within: 화자 내 공분산용 가중치 (None이면 alpha 공유)
        name: 프리셋 이름 (명시적 구성은 "custom")
    """
    phi0: CovRole
    phi1: CovRole
    phi2: CovRole
    alpha: float
    alpha_within: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        for value in (self.alpha, self.alpha_within):
            if value is not None and not 0.0 <= value <= 1.0:
                raise InvalidRecipe(f"alpha는 [0, 1] 범위여야 합니다 (현재: {value})")
        if self.phi0.depth > 0:
            raise InvalidRecipe("Φ_0에는 GAMMA 역할을 쓸 수 없습니다")

    @property
    def needs_ind_model(self) -> bool:
        return any(r.needs_ind_model for r in (self.phi0, self.phi1, self.phi2))

    def alpha_for(self, which: str) -> float:
        """공분산 종류별 가중치"""
        if which == "within" and self.alpha_within is not None:
            return self.alpha_within
        return self.alpha

    def describe(self) -> str:
        return f"{self.name}: Φ0={self.phi0}, Φ1={self.phi1}, Φ2={self.phi2}, α={self.alpha:g}"


# 프리셋 (Φ_0, Φ_1, Φ_2)
PRESET_ROLES: Dict[str, Tuple[CovRole, CovRole, CovRole]] = {
    "coral_plus": (OOD, PSEUDO, OOD),
    "kaldi": (OOD, TOTAL_IND, OOD_TOTAL_PLDA),
    "lip": (IND, OOD, OOD),
    "lip_reg": (IND, OOD, IND),
    "cip": (IND, PSEUDO, PSEUDO),
    "cip_reg": (IND, PSEUDO, IND),
    "case7": (IND, PSEUDO, OOD),
    "case8": (IND, gamma(PSEUDO, OOD), IND),
}

PRESET_NAMES = tuple(PRESET_ROLES.keys())


def preset(name: str, alpha: float, alpha_within: Optional[float] = None) -> AdaptRecipe:
    """
    이름으로 프리셋 레시피 생성

    Args:
        name: 프리셋 이름 (coral_plus, kaldi, lip, lip_reg, cip, cip_reg, case7, case8)
        alpha: 보간 가중치
        alpha_within: 화자 내 공분산 가중치 (선택)

    Returns:
        AdaptRecipe

    Raises:
        UnknownPreset: 알 수 없는 이름
    """
    key = name.strip().lower().replace("-", "_")
    if key not in PRESET_ROLES:
        raise UnknownPreset(f"알 수 없는 프리셋: {name} (가능: {', '.join(PRESET_NAMES)})")
    phi0, phi1, phi2 = PRESET_ROLES[key]
    return AdaptRecipe(phi0, phi1, phi2, alpha=alpha, alpha_within=alpha_within, name=key)
