"""
대칭 행렬 수치 커널
PSD 제곱근, 역제곱근, 두 대칭 행렬의 동시 대각화
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg

from src.domain.errors import DimMismatch, NotPSD, Singular


logger = logging.getLogger(__name__)

# 고유값 플로어 (최대 고유값 크기 대비 상대값)
EPS_FLOOR_REL = 1e-10

# 플로어링 후 고유값 (ε_floor 배수, psd_inv_sqrt의 λ > ε_floor 조건을 만족)
SPD_FLOOR_FACTOR = 10.0


class SymMatrix:
    """
    대칭 행렬

    생성 시 (M + Mᵀ)/2로 대칭화하므로 entries[i][j] == entries[j][i]가 정확히 성립.
    내부 배열은 읽기 전용
    """

    __slots__ = ("_entries",)

    def __init__(self, entries):
        """
        Args:
            entries: (dim, dim) 실수 배열
        """
        array = np.array(entries, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1, 1)
        if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] < 1:
            raise DimMismatch(f"정방 행렬이 필요합니다 (현재: {array.shape})")

        symmetric = 0.5 * (array + array.T)
        symmetric.flags.writeable = False
        self._entries = symmetric

    @classmethod
    def identity(cls, dim: int) -> 'SymMatrix':
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim: int) -> 'SymMatrix':
        return cls(np.zeros((dim, dim)))

    @classmethod
    def diag(cls, values) -> 'SymMatrix':
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        """읽기 전용 (dim, dim) 배열"""
        return self._entries

    def __add__(self, other: 'SymMatrix') -> 'SymMatrix':
        _check_same_dim(self, other)
        return SymMatrix(self._entries + other._entries)

    def __sub__(self, other: 'SymMatrix') -> 'SymMatrix':
        _check_same_dim(self, other)
        return SymMatrix(self._entries - other._entries)

    def scaled(self, factor: float) -> 'SymMatrix':
        return SymMatrix(factor * self._entries)

    def congruence(self, transform: np.ndarray) -> 'SymMatrix':
        """A · M · Aᵀ 계산"""
        transform = np.asarray(transform, dtype=np.float64)
        return SymMatrix(transform @ self._entries @ transform.T)

    def eigvalsh(self) -> np.ndarray:
        """오름차순 고유값"""
        return linalg.eigvalsh(self._entries)

    def min_eigval(self) -> float:
        return float(self.eigvalsh()[0])

    def trace(self) -> float:
        return float(np.trace(self._entries))

    def equals(self, other: 'SymMatrix') -> bool:
        """비트 단위 동일 여부"""
        return self.dim == other.dim and np.array_equal(self._entries, other._entries)

    def __repr__(self) -> str:
        return f"SymMatrix(dim={self.dim})"


@dataclass(frozen=True)
class SimDiag:
    """
    동시 대각화 결과

    Attributes:
        basis: 변환 행렬 V (열 벡터가 일반화 고유벡터)
        eigvals: 일반화 고유값 (내림차순)
    """
    basis: np.ndarray
    eigvals: np.ndarray


def _check_same_dim(a: SymMatrix, b: SymMatrix) -> None:
    if a.dim != b.dim:
        raise DimMismatch(f"행렬 차원이 일치해야 합니다 ({a.dim} != {b.dim})")


def eigen_floor(eigvals: np.ndarray) -> float:
    """고유값 플로어 ε_floor = 1e-10 × 최대 고유값 크기"""
    if eigvals.size == 0:
        return 0.0
    return EPS_FLOOR_REL * float(np.max(np.abs(eigvals)))


def _eigh(m: SymMatrix) -> Tuple[np.ndarray, np.ndarray]:
    return linalg.eigh(m.entries)


def _clamp(eigvals: np.ndarray, eps: float) -> np.ndarray:
    # (-ε, ε] 구간은 ε로 올림
    clamped = eigvals.copy()
    clamped[(clamped > -eps) & (clamped <= eps)] = eps
    return clamped


def psd_sqrt(m: SymMatrix) -> SymMatrix:
    """
    PSD 행렬의 대칭 제곱근

    Args:
        m: 대칭 PSD 행렬

    Returns:
        R·R == M 을 만족하는 대칭 행렬 R

    Raises:
        NotPSD: 고유값이 -ε_floor 미만인 경우
    """
    eigvals, eigvecs = _eigh(m)
    eps = eigen_floor(eigvals)
    if eigvals[0] < -eps:
        raise NotPSD(f"음의 고유값이 있습니다 (최소 고유값: {eigvals[0]:.3e})")

    roots = np.sqrt(_clamp(eigvals, eps))
    return SymMatrix((eigvecs * roots) @ eigvecs.T)


def psd_inv_sqrt(m: SymMatrix) -> SymMatrix:
    """
    SPD 행렬의 대칭 역제곱근 (백색화 행렬)

    Args:
        m: 대칭 양의 정부호 행렬

    Returns:
        W·M·W == I 를 만족하는 대칭 행렬 W

    Raises:
        Singular: 고유값이 ε_floor 이하인 경우
    """
    eigvals, eigvecs = _eigh(m)
    eps = eigen_floor(eigvals)
    if eigvals[0] <= eps:
        raise Singular(f"행렬이 특이합니다 (최소 고유값: {eigvals[0]:.3e})")

    inv_roots = 1.0 / np.sqrt(eigvals)
    return SymMatrix((eigvecs * inv_roots) @ eigvecs.T)


def floor_spd(m: SymMatrix, reference_scale: float = 0.0) -> SymMatrix:
    """
    고유값 플로어링으로 SPD 보장

    Args:
        m: 대칭 행렬
        reference_scale: 행렬이 0일 때 사용할 기준 크기 (0이면 1.0)

    Returns:
        모든 고유값이 ε_floor보다 큰 행렬 (ε_floor 이하는 SPD_FLOOR_FACTOR·ε_floor로 올림)
    """
    eigvals, eigvecs = _eigh(m)
    scale = float(np.max(np.abs(eigvals)))
    if scale == 0.0:
        scale = reference_scale if reference_scale > 0 else 1.0
    eps = EPS_FLOOR_REL * scale

    if eigvals[0] > eps:
        return m

    floor = SPD_FLOOR_FACTOR * eps
    logger.warning(f"고유값 플로어링 적용: 최소 {eigvals[0]:.3e} → {floor:.3e}")
    floored = np.maximum(eigvals, floor)
    return SymMatrix((eigvecs * floored) @ eigvecs.T)


def simultaneous_diag(y: SymMatrix, z: SymMatrix) -> SimDiag:
    """
    두 대칭 행렬의 동시 대각화

    W = Z^{-1/2}, W·Y·W = U·Λ·Uᵀ, V = W·U 로 계산하여
    Vᵀ·Z·V = I, Vᵀ·Y·V = diag(Λ) 를 만족시킴

    Args:
        y: 대칭 PSD 행렬
        z: 대칭 양의 정부호 행렬

    Returns:
        SimDiag (Λ 내림차순, 각 열은 절댓값 최대 원소가 양수)

    Raises:
        DimMismatch: 차원이 다른 경우
        Singular: Z가 특이한 경우
    """
    _check_same_dim(y, z)

    whitener = psd_inv_sqrt(z).entries
    whitened = SymMatrix(whitener @ y.entries @ whitener)
    eigvals, eigvecs = _eigh(whitened)

    # 내림차순 정렬
    order = np.argsort(-eigvals, kind="stable")
    eigvals = np.maximum(eigvals[order], 0.0)
    basis = whitener @ eigvecs[:, order]

    # 부호 고정: 각 열의 절댓값 최대 원소를 양수로
    pivots = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[pivots, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    basis = basis * signs

    basis.flags.writeable = False
    eigvals.flags.writeable = False
    return SimDiag(basis=basis, eigvals=eigvals)
