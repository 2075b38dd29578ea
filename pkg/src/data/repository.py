"""
백엔드 모델 Repository
train 단계 산출물(LDA, 평균, PLDA, 전체 공분산)의 저장/로드
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from src.adapt.catalog import CovarianceCatalog
from src.data import formats
from src.data.formats import FormatError
from src.domain.errors import DimMismatch
from src.linalg.symmat import SymMatrix
from src.plda.model import PldaModel
from src.preprocess.lda import LdaProjection


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainedBackend:
    """
    학습된 백엔드 구성 요소

    Attributes:
        ood_mean: LDA 공간의 OOD 평균 (OOD 센터링용)
        ind_mean: LDA 공간의 InD 평균 (InD/등록/테스트 센터링용)
        plda_ood: OOD PLDA
        cov_ood: 센터링된 OOD 전체 공분산
        cov_ind: 센터링된 InD 전체 공분산
        plda_ind: InD PLDA (InD가 레이블 없으면 None)
        lda: LDA 투영 (비활성화 시 None)
    """
    ood_mean: np.ndarray
    ind_mean: np.ndarray
    plda_ood: PldaModel
    cov_ood: SymMatrix
    cov_ind: SymMatrix
    plda_ind: Optional[PldaModel] = None
    lda: Optional[LdaProjection] = None

    def __post_init__(self):
        dims = {
            self.plda_ood.dim, self.cov_ood.dim, self.cov_ind.dim,
            len(self.ood_mean), len(self.ind_mean),
        }
        if self.plda_ind is not None:
            dims.add(self.plda_ind.dim)
        if self.lda is not None:
            dims.add(self.lda.out_dim)
        if len(dims) != 1:
            raise DimMismatch(f"백엔드 구성 요소 차원이 일치하지 않습니다: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.plda_ood.dim

    def catalog(self) -> CovarianceCatalog:
        """적응용 공분산 카탈로그"""
        return CovarianceCatalog.from_models(
            self.plda_ood, self.cov_ood, self.cov_ind, ind=self.plda_ind
        )


class BackendRepository(ABC):
    """
    백엔드 Repository 인터페이스

    저장 매체와 무관하게 학습 산출물을 저장/로드하는 추상 인터페이스
    """

    @abstractmethod
    def save(self, backend: TrainedBackend) -> None:
        """학습 산출물 저장"""
        pass

    @abstractmethod
    def load(self) -> TrainedBackend:
        """
        학습 산출물 로드

        Raises:
            FormatError: 파일이 없거나 형식이 잘못된 경우
        """
        pass


class DirectoryBackendRepository(BackendRepository):
    """
    디렉토리 기반 Repository

    산출물마다 텍스트 파일 하나를 사용:
    lda.txt, ood_mean.txt, ind_mean.txt, plda_ood.txt, plda_ind.txt, cov_ood.txt, cov_ind.txt
    """

    LDA = "lda.txt"
    OOD_MEAN = "ood_mean.txt"
    IND_MEAN = "ind_mean.txt"
    PLDA_OOD = "plda_ood.txt"
    PLDA_IND = "plda_ind.txt"
    COV_OOD = "cov_ood.txt"
    COV_IND = "cov_ind.txt"

    def __init__(self, directory: str):
        """
        Args:
            directory: 산출물 디렉토리
        """
        self.directory = Path(directory)

    def path(self, name: str) -> Path:
        return self.directory / name

    def save(self, backend: TrainedBackend) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)

        # 이전 학습의 선택적 산출물이 남지 않도록 정리
        for name, present in ((self.LDA, backend.lda), (self.PLDA_IND, backend.plda_ind)):
            if present is None and self.path(name).exists():
                self.path(name).unlink()

        if backend.lda is not None:
            formats.write_lda(self.path(self.LDA), backend.lda)
        formats.write_vector(self.path(self.OOD_MEAN), backend.ood_mean)
        formats.write_vector(self.path(self.IND_MEAN), backend.ind_mean)
        formats.write_plda(self.path(self.PLDA_OOD), backend.plda_ood)
        if backend.plda_ind is not None:
            formats.write_plda(self.path(self.PLDA_IND), backend.plda_ind)
        formats.write_symmatrix(self.path(self.COV_OOD), backend.cov_ood)
        formats.write_symmatrix(self.path(self.COV_IND), backend.cov_ind)

        logger.info(
            f"백엔드 저장: {self.directory} "
            f"(InD PLDA {'포함' if backend.plda_ind is not None else '없음'}, "
            f"LDA {'포함' if backend.lda is not None else '없음'})"
        )

    def load(self) -> TrainedBackend:
        if not self.directory.is_dir():
            raise FormatError("모델 디렉토리가 없습니다", self.directory)

        lda_path = self.path(self.LDA)
        plda_ind_path = self.path(self.PLDA_IND)
        backend = TrainedBackend(
            ood_mean=formats.read_vector(self.path(self.OOD_MEAN)),
            ind_mean=formats.read_vector(self.path(self.IND_MEAN)),
            plda_ood=formats.read_plda(self.path(self.PLDA_OOD)),
            cov_ood=formats.read_symmatrix(self.path(self.COV_OOD)),
            cov_ind=formats.read_symmatrix(self.path(self.COV_IND)),
            plda_ind=formats.read_plda(plda_ind_path) if plda_ind_path.exists() else None,
            lda=formats.read_lda(lda_path) if lda_path.exists() else None,
        )
        logger.debug(f"백엔드 로드: {self.directory} ({backend.dim}차원)")
        return backend
