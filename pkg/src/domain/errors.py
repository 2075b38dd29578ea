"""
도메인 예외 정의
백엔드 전 계층에서 사용하는 오류 계층 구조
"""


class BackendError(ValueError):
    """
    백엔드 공통 예외

    모든 도메인 오류의 기반 클래스. ValueError를 상속하므로
    기존 ValueError 처리 코드와도 호환됨
    """

    @property
    def kind(self) -> str:
        """오류 종류 (클래스 이름)"""
        return type(self).__name__


class NotPSD(BackendError):
    """행렬이 양의 준정부호가 아님"""
    pass


class Singular(BackendError):
    """행렬이 (플로어링 후에도) 역행렬을 갖지 않음"""
    pass


class DimMismatch(BackendError):
    """차원 불일치"""
    pass


class TooFewRecords(BackendError):
    """레코드 수 부족"""
    pass


class TooFewSpeakers(BackendError):
    """화자 수 부족"""
    pass


class NoWithinSpeakerVariation(BackendError):
    """모든 화자가 발화 1개뿐이라 화자 내 분산 추정 불가"""
    pass


class UnknownUtterance(BackendError):
    """trial이 참조하는 발화 ID가 없음"""
    pass


class MissingInDomainModel(BackendError):
    """레시피가 InD PLDA를 요구하지만 카탈로그에 없음"""
    pass


class UnknownPreset(BackendError):
    """알 수 없는 프리셋 이름"""
    pass


class InvalidRecipe(BackendError):
    """레시피 구성이 잘못됨 (가중치 범위, 중첩 깊이 등)"""
    pass


class EmptySet(BackendError):
    """빈 임베딩 집합"""
    pass


class TooFewClasses(BackendError):
    """LDA 학습에 필요한 클래스 수 부족"""
    pass


class OutDimTooLarge(BackendError):
    """요청한 LDA 출력 차원이 너무 큼"""
    pass


class NoTargets(BackendError):
    """target trial이 없음"""
    pass


class NoNontargets(BackendError):
    """nontarget trial이 없음"""
    pass


class KTooLarge(BackendError):
    """top-K가 코호트 크기보다 큼"""
    pass


class DegenerateCohort(BackendError):
    """코호트 점수 표준편차가 0에 가까움"""
    pass


class InvalidConfig(BackendError):
    """설정 값이 잘못됨"""
    pass
