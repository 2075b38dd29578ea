"""
대칭 행렬 커널 모듈
PSD 제곱근, 역제곱근, 동시 대각화 제공
"""
from src.linalg.symmat import (
    SymMatrix,
    SimDiag,
    psd_sqrt,
    psd_inv_sqrt,
    simultaneous_diag,
    floor_spd,
)

__all__ = [
    'SymMatrix',
    'SimDiag',
    'psd_sqrt',
    'psd_inv_sqrt',
    'simultaneous_diag',
    'floor_spd',
]
