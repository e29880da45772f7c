"""
Kernels densos de álgebra lineal en doble precisión
Ortogonalización, iteración de potencia por bloques, SVD truncada y completado ortogonal
"""
import logging
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from ldadam.errors import LinalgError
from ldadam.rng import STREAM_GRAM_SCHMIDT, make_rng

logger = logging.getLogger(__name__)

Matrix = npt.NDArray[np.float64]
OrthonormalBasis = npt.NDArray[np.float64]

ORTHONORMALITY_TOL = 1e-10
DEGENERACY_TOL = 1e-12


class GramSchmidtResult(NamedTuple):
    """Base ortonormal y cantidad de columnas sustituidas por degeneración"""
    basis: OrthonormalBasis
    degenerate_columns: int


# ==================== FUNCIONES AUXILIARES ====================#
def as_matrix(M, name: str = "M") -> Matrix:
    """Convierte a matriz 2-D float64 y valida que todas las entradas sean finitas"""
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise LinalgError(f"{name} debe ser una matriz 2-D no vacía, forma recibida: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LinalgError(f"{name} contiene entradas no finitas")
    return arr


def orthonormality_error(P: Matrix) -> float:
    """max|PᵀP − I| por entrada"""
    r = P.shape[1]
    return float(np.max(np.abs(P.T @ P - np.eye(r))))


def _project_out(v: Matrix, Q: Matrix, k: int) -> None:
    """Gram-Schmidt modificado contra las primeras k columnas de Q (en sitio, dos pasadas)"""
    for _ in range(2):
        for i in range(k):
            v -= (Q[:, i] @ v) * Q[:, i]


def _substitute_column(Q: Matrix, k: int) -> Matrix:
    """Vector unitario pseudoaleatorio determinista (semilla = índice de columna) ortogonal a Q[:, :k]"""
    n = Q.shape[0]
    attempt = 0
    while True:
        rng = make_rng(k, STREAM_GRAM_SCHMIDT, attempt)
        w = rng.standard_normal(n)
        _project_out(w, Q, k)
        norm = np.linalg.norm(w)
        if norm > DEGENERACY_TOL * 2:
            return w / norm
        attempt += 1


# ==================== OPERACIONES ====================#
def orthonormalize(M) -> GramSchmidtResult:
    """
    Gram-Schmidt modificado con una pasada de re-ortogonalización

    Una columna cuya norma tras la proyección cae bajo 1e-12·(norma de entrada + 1)
    se reemplaza por un vector pseudoaleatorio determinista ortogonal a las
    columnas ya aceptadas, de modo que la base siempre tiene rango completo.
    """
    M = as_matrix(M)
    n, r = M.shape
    if r > n:
        raise LinalgError(f"No se pueden ortonormalizar {r} columnas en dimensión {n}")

    Q = np.zeros((n, r))
    degenerate = 0
    for k in range(r):
        v = M[:, k].copy()
        input_norm = np.linalg.norm(v)
        _project_out(v, Q, k)
        norm = np.linalg.norm(v)
        if norm < DEGENERACY_TOL * (input_norm + 1.0):
            Q[:, k] = _substitute_column(Q, k)
            degenerate += 1
        else:
            Q[:, k] = v / norm

    if degenerate:
        logger.debug(f"⚠️ Gram-Schmidt sustituyó {degenerate} columna(s) degenerada(s)")
    return GramSchmidtResult(Q, degenerate)


def gram_schmidt(M) -> OrthonormalBasis:
    """Base ortonormal del espacio columna de M (ver orthonormalize)"""
    return orthonormalize(M).basis


def block_power_iteration_step(B, P_prev) -> OrthonormalBasis:
    """
    Una iteración de potencia por bloques: gram_schmidt(B·(Bᵀ·P_prev))

    El producto r-columnas se calcula primero; B·Bᵀ (n×n) nunca se materializa.
    Con B = 0 se conserva el subespacio anterior.
    """
    B = as_matrix(B, "B")
    P_prev = as_matrix(P_prev, "P_prev")
    if B.shape[0] != P_prev.shape[0]:
        raise LinalgError(f"Formas inconsistentes: B {B.shape}, P {P_prev.shape}")
    if not np.any(B):
        return P_prev.copy()
    C = B.T @ P_prev
    Y = B @ C
    return gram_schmidt(Y)


def _normalize_signs(U: Matrix) -> Matrix:
    """Convención de signo: la entrada de mayor magnitud de cada columna es positiva"""
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def truncated_svd(B, r: int) -> OrthonormalBasis:
    """
    Los r vectores singulares izquierdos más significativos de B

    Se obtienen de la descomposición espectral de la matriz de Gram más pequeña;
    empates en valores singulares se resuelven por el orden de índices del
    solver (orden estable). Es el oráculo de proyección óptima, no un camino caliente.
    """
    B = as_matrix(B, "B")
    n, m = B.shape
    if not 1 <= r <= min(n, m):
        raise LinalgError(f"Rango r={r} fuera de [1, {min(n, m)}] para B de forma {B.shape}")

    if n <= m:
        eigvals, eigvecs = np.linalg.eigh(B @ B.T)
        order = np.argsort(-eigvals, kind='stable')[:r]
        U = eigvecs[:, order]
    else:
        eigvals, eigvecs = np.linalg.eigh(B.T @ B)
        order = np.argsort(-eigvals, kind='stable')[:r]
        V = eigvecs[:, order]
        sigma = np.sqrt(np.clip(eigvals[order], 0.0, None))
        BV = B @ V
        U = np.zeros((n, r))
        keep = sigma > DEGENERACY_TOL * max(float(sigma[0]), 1.0)
        U[:, keep] = BV[:, keep] / sigma[keep]

    return _normalize_signs(gram_schmidt(U))


def leading_subspace(B, r: int) -> OrthonormalBasis:
    """
    Base n×r inicial para una capa: SVD truncada completada de forma determinista

    Si r supera min(n, m) (capas vectoriales) las columnas restantes se completan
    con direcciones canónicas ortogonalizadas; con B = 0 devuelve [I_r; 0].
    """
    B = as_matrix(B, "B")
    n, m = B.shape
    if not 1 <= r <= n:
        raise LinalgError(f"Rango r={r} fuera de [1, {n}]")
    if not np.any(B):
        return np.eye(n, r)
    k = min(r, m)
    U = truncated_svd(B, k)
    if k == r:
        return U
    return gram_schmidt(np.hstack([U, np.eye(n, r - k)]))


def residual_ratio(B, P) -> float:
    """q empírico: ‖B − P(PᵀB)‖_F / ‖B‖_F ∈ [0, 1]"""
    B = as_matrix(B, "B")
    norm_b = np.linalg.norm(B)
    if norm_b == 0.0:
        raise LinalgError("residual_ratio no está definido para ‖B‖_F = 0")
    residual = B - P @ (P.T @ B)
    return float(min(1.0, np.linalg.norm(residual) / norm_b))


def orthogonal_complete(P) -> Matrix:
    """Matriz ortogonal Q (n×n) cuyas primeras r columnas son exactamente P"""
    P = as_matrix(P, "P")
    n, r = P.shape
    if r > n:
        raise LinalgError(f"P de forma {P.shape} no puede ser ortonormal")
    if r == n:
        return P.copy()
    Q_full, _ = np.linalg.qr(P, mode='complete')
    complement = Q_full[:, r:]
    completed = gram_schmidt(np.hstack([P, complement]))
    return np.hstack([P, completed[:, r:]])
