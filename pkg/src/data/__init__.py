"""
데이터 레이어
텍스트 파일 형식과 학습 산출물 Repository
"""
from src.data.formats import FormatError, FORMAT_VERSION
from src.data.repository import BackendRepository, DirectoryBackendRepository, TrainedBackend

__all__ = [
    'FormatError',
    'FORMAT_VERSION',
    'BackendRepository',
    'DirectoryBackendRepository',
    'TrainedBackend',
]
