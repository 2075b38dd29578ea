"""
CORAL 변환 및 Γ_max 정규화
의사 InD 공분산 계산과 분산 증가 보장 연산
"""
import numpy as np

from src.domain.errors import DimMismatch
from src.linalg.symmat import SymMatrix, floor_spd, psd_inv_sqrt, psd_sqrt, simultaneous_diag


def coral_transform(c_o: SymMatrix, c_i: SymMatrix) -> np.ndarray:
    """
    CORAL 재색상 변환 행렬 C_I^{1/2} · C_O^{-1/2}

    Args:
        c_o: OOD 전체 공분산
        c_i: InD 전체 공분산

    Returns:
        (dim, dim) 변환 행렬 (일반적으로 비대칭)
    """
    if c_o.dim != c_i.dim:
        raise DimMismatch(f"전체 공분산 차원이 다릅니다 ({c_o.dim} != {c_i.dim})")
    return psd_sqrt(c_i).entries @ psd_inv_sqrt(c_o).entries


def coral_pseudo(phi_o: SymMatrix, c_o: SymMatrix, c_i: SymMatrix) -> SymMatrix:
    """
    의사 InD 공분산

    OOD 벡터를 백색화한 뒤 InD 전체 공분산으로 재색상한 것과 같은 변환을
    OOD PLDA 공분산에 적용: C_I^{1/2} C_O^{-1/2} Φ_O C_O^{-1/2} C_I^{1/2}

    Args:
        phi_o: OOD PLDA 공분산 (화자 간 또는 화자 내)
        c_o: OOD 전체 공분산 (SPD)
        c_i: InD 전체 공분산 (SPD)

    Returns:
        의사 InD 공분산 (대칭 PSD)

    Raises:
        Singular: 전체 공분산이 특이한 경우
        DimMismatch: 차원 불일치
    """
    if phi_o.dim != c_o.dim:
        raise DimMismatch(f"PLDA 공분산과 전체 공분산 차원이 다릅니다 ({phi_o.dim} != {c_o.dim})")
    return phi_o.congruence(coral_transform(c_o, c_i))


def _trace_scale(m: SymMatrix) -> float:
    # Z가 0 행렬일 때 플로어 크기 기준
    return max(m.trace() / m.dim, 0.0)


def gamma_max(y: SymMatrix, z: SymMatrix) -> SymMatrix:
    """
    Γ_max 정규화

    (Y, Z)를 동시 대각화한 공간에서 고유값과 1 중 큰 값을 취해 되돌림.
    Vᵀ Z V = I 이므로 V^{-T} = Z V 이며,
    결과 G = Z V · max(diag(Λ), I) · Vᵀ Z 는 G − Y, G − Z 모두 PSD.
    계수 부족인 Z (화자 수 ≤ 차원인 InD 화자 간 공분산 등)는 고유값 플로어링 후 사용

    Args:
        y: 대칭 PSD 행렬 (developer 공분산)
        z: 대칭 PSD 행렬 (reference 공분산)

    Returns:
        분산이 두 인자 이상으로 보장된 공분산

    Raises:
        DimMismatch: 차원 불일치
    """
    z = floor_spd(z, reference_scale=_trace_scale(y))
    sd = simultaneous_diag(y, z)
    inv_t = z.entries @ sd.basis
    return SymMatrix((inv_t * np.maximum(sd.eigvals, 1.0)) @ inv_t.T)


def gamma_max_split(
    y: SymMatrix,
    z: SymMatrix,
    z_between: SymMatrix,
    z_within: SymMatrix
):
    """
    전체 공분산 수준 Γ_max의 초과 분산을 화자 간/내로 분할

    Z = Z_b + Z_w 일 때, 각 일반화 고유방향 v_i의 초과 분산 (max(λ_i,1) − 1)을
    그 방향의 OOD 화자 간/내 분산 비율 (v_iᵀZ_b v_i, v_iᵀZ_w v_i)로 나눔.
    두 결과의 합은 gamma_max(y, z)와 같음

    Args:
        y: InD 전체 공분산
        z: OOD PLDA 전체 공분산 (Φ_b + Φ_w)
        z_between: OOD 화자 간 공분산
        z_within: OOD 화자 내 공분산

    Returns:
        (화자 간 결과, 화자 내 결과) 튜플
    """
    z = floor_spd(z, reference_scale=_trace_scale(y))
    sd = simultaneous_diag(y, z)
    basis = sd.basis
    excess = np.maximum(sd.eigvals, 1.0) - 1.0

    between_share = np.einsum("ij,ik,kj->j", basis, z_between.entries, basis)
    within_share = np.einsum("ij,ik,kj->j", basis, z_within.entries, basis)
    norm = between_share + within_share
    norm[norm <= 0] = 1.0

    inv_t = z.entries @ basis
    between_excess = (inv_t * (excess * between_share / norm)) @ inv_t.T
    within_excess = (inv_t * (excess * within_share / norm)) @ inv_t.T

    return (
        SymMatrix(z_between.entries + between_excess),
        SymMatrix(z_within.entries + within_excess),
    )
