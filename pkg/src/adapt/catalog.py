"""
공분산 카탈로그
두 도메인의 PLDA/전체 공분산과 CORAL 의사 공분산을 역할 이름으로 제공
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from src.adapt.coral import coral_pseudo, gamma_max
from src.adapt.recipe import CovRole, RoleKind
from src.domain.errors import DimMismatch, InvalidRecipe, MissingInDomainModel
from src.linalg.symmat import SymMatrix, floor_spd
from src.plda.model import PldaModel


logger = logging.getLogger(__name__)

BETWEEN = "between"
WITHIN = "within"


@dataclass(frozen=True)
class CovarianceCatalog:
    """
    적응 레시피가 참조하는 공분산 모음

    생성 후 변경되지 않으므로 여러 레시피를 동시에 평가해도 안전함.
    의사 공분산은 처음 접근할 때 계산하여 보관

    Attributes:
        phi_o_b: OOD 화자 간 공분산
        phi_o_w: OOD 화자 내 공분산
        c_o: OOD 전체 공분산 (SPD)
        c_i: InD 전체 공분산 (SPD)
        phi_i_b: InD 화자 간 공분산 (비지도 모드에서는 None)
        phi_i_w: InD 화자 내 공분산 (비지도 모드에서는 None)
    """
    phi_o_b: SymMatrix
    phi_o_w: SymMatrix
    c_o: SymMatrix
    c_i: SymMatrix
    phi_i_b: Optional[SymMatrix] = None
    phi_i_w: Optional[SymMatrix] = None

    def __post_init__(self):
        if (self.phi_i_b is None) != (self.phi_i_w is None):
            raise MissingInDomainModel("InD 화자 간/내 공분산은 함께 주어져야 합니다")

        dims = {m.dim for m in self._present()}
        if len(dims) != 1:
            raise DimMismatch(f"카탈로그 행렬 차원이 일치하지 않습니다: {sorted(dims)}")

        object.__setattr__(self, "c_o", floor_spd(self.c_o))
        object.__setattr__(self, "c_i", floor_spd(self.c_i))

    @classmethod
    def from_models(
        cls,
        ood: PldaModel,
        c_o: SymMatrix,
        c_i: SymMatrix,
        ind: Optional[PldaModel] = None
    ) -> 'CovarianceCatalog':
        """PLDA 모델과 전체 공분산으로 카탈로그 구성"""
        return cls(
            phi_o_b=ood.phi_b,
            phi_o_w=ood.phi_w,
            c_o=c_o,
            c_i=c_i,
            phi_i_b=ind.phi_b if ind is not None else None,
            phi_i_w=ind.phi_w if ind is not None else None,
        )

    def _present(self):
        matrices = [self.phi_o_b, self.phi_o_w, self.c_o, self.c_i]
        if self.phi_i_b is not None:
            matrices += [self.phi_i_b, self.phi_i_w]
        return matrices

    @property
    def dim(self) -> int:
        return self.phi_o_b.dim

    @property
    def has_ind_model(self) -> bool:
        return self.phi_i_b is not None

    @cached_property
    def pseudo_b(self) -> SymMatrix:
        """CORAL 의사 InD 화자 간 공분산"""
        logger.debug("의사 InD 화자 간 공분산 계산")
        return coral_pseudo(self.phi_o_b, self.c_o, self.c_i)

    @cached_property
    def pseudo_w(self) -> SymMatrix:
        """CORAL 의사 InD 화자 내 공분산"""
        logger.debug("의사 InD 화자 내 공분산 계산")
        return coral_pseudo(self.phi_o_w, self.c_o, self.c_i)

    @cached_property
    def ood_total_plda(self) -> SymMatrix:
        """Φ_O_b + Φ_O_w"""
        return self.phi_o_b + self.phi_o_w

    def resolve(self, role: CovRole, which: str) -> SymMatrix:
        """
        역할을 구체적인 공분산으로 변환

        Args:
            role: 공분산 역할
            which: "between" 또는 "within" (TOTAL 역할은 둘 다 같은 행렬)

        Returns:
            해당 공분산

        Raises:
            MissingInDomainModel: InD PLDA가 없는데 IND 역할을 요청한 경우
        """
        if which not in (BETWEEN, WITHIN):
            raise InvalidRecipe(f"공분산 종류는 between 또는 within이어야 합니다: {which}")
        between = which == BETWEEN

        if role.kind == RoleKind.OOD:
            return self.phi_o_b if between else self.phi_o_w
        if role.kind == RoleKind.IND:
            if not self.has_ind_model:
                raise MissingInDomainModel("레시피가 InD PLDA를 요구하지만 카탈로그에 없습니다")
            return self.phi_i_b if between else self.phi_i_w
        if role.kind == RoleKind.PSEUDO:
            return self.pseudo_b if between else self.pseudo_w
        if role.kind == RoleKind.TOTAL_OOD:
            return self.c_o
        if role.kind == RoleKind.TOTAL_IND:
            return self.c_i
        if role.kind == RoleKind.OOD_TOTAL_PLDA:
            return self.ood_total_plda

        first = self.resolve(role.first, which)
        second = self.resolve(role.second, which)
        if role.first == role.second or first.equals(second):
            return first
        return gamma_max(first, second)
