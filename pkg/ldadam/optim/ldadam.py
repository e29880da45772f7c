"""
LDAdam: Adam de baja dimensión con transporte de momentos entre subespacios
y retroalimentación de error generalizada guardada en el acumulador
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from ldadam.errors import ConfigurationError, DivergenceError, LinalgError
from ldadam.linalg import (
    Matrix,
    OrthonormalBasis,
    ORTHONORMALITY_TOL,
    block_power_iteration_step,
    leading_subspace,
    orthonormality_error,
    residual_ratio,
)
from ldadam.optim.config import OptimizerConfig

logger = logging.getLogger(__name__)

Side = Literal['left', 'right']

# Capas vectoriales hasta esta dimensión guardan (P_t, v̂ᵘ_t) para el monitor Γ
SNAPSHOT_MAX_DIM = 128


@dataclass
class StepDiagnostics:
    """Cantidades observadas en un paso de una capa"""
    t: int
    q: float
    b_norm: float
    e_norm: float
    vhat_max: float
    orthonormality_error: float
    basis: Optional[OrthonormalBasis] = None
    vhat_floor: Optional[Matrix] = None


@dataclass
class LDAdamState:
    """
    Estado por capa

    A se guarda con la forma original de la capa; con side='right' el
    álgebra opera sobre Aᵀ (vista, sin copia). P es None hasta el primer paso.
    """
    config: OptimizerConfig
    shape: tuple[int, int]
    side: Side
    A: Matrix
    m: Matrix
    v: Matrix
    t: int = 0
    P: Optional[OrthonormalBasis] = None
    vhat_max: float = 0.0
    layer_id: str | int | None = None
    last: Optional[StepDiagnostics] = field(default=None, compare=False)

    @property
    def rank(self) -> int:
        return self.config.rank

    @property
    def working_shape(self) -> tuple[int, int]:
        n, m = self.shape
        return (n, m) if self.side == 'left' else (m, n)

    def working(self, X: Matrix) -> Matrix:
        """Vista de X en la orientación proyectada"""
        return X if self.side == 'left' else X.T


# ==================== FUNCIONES AUXILIARES ====================#
def resolve_side(shape: tuple[int, int], side: str = 'auto') -> Side:
    """
    Lado de proyección: el de menor dimensión (izquierda si n ≤ m)

    Los vectores columna (d×1, d > 1) se proyectan a lo largo de d.
    """
    if side in ('left', 'right'):
        return side
    n, m = shape
    if m == 1:
        return 'left'
    return 'left' if n <= m else 'right'


def _fixed_basis(config: OptimizerConfig, n: int) -> OrthonormalBasis:
    r = config.rank
    if config.fixed_basis is None:
        return np.eye(n, r)
    P = np.asarray(config.fixed_basis, dtype=np.float64)
    if P.shape != (n, r):
        raise ConfigurationError(f"fixed_basis tiene forma {P.shape}, se esperaba {(n, r)}")
    if orthonormality_error(P) > ORTHONORMALITY_TOL:
        raise ConfigurationError("fixed_basis no es ortonormal")
    return P


def _initialize_projection(state: LDAdamState) -> None:
    """P₀: SVD truncada del acumulador completo del primer paso (o la base fija)"""
    n, _ = state.working_shape
    if state.config.projection == 'fixed':
        state.P = _fixed_basis(state.config, n)
    else:
        state.P = leading_subspace(state.working(state.A), state.rank)


def _momentum_in_full_space(state: LDAdamState) -> Matrix:
    return state.P @ state.m


def _fit_target(state: LDAdamState, t: int, P_m: Matrix) -> Matrix:
    cfg = state.config
    A_w = state.working(state.A)
    if cfg.mode == 'analytical':
        return cfg.beta1 * P_m + (1.0 - cfg.beta1) * A_w
    if t == 1:
        return (1.0 - cfg.rho) * A_w
    m_hat = P_m / (1.0 - cfg.beta1 ** (t - 1))
    return cfg.rho * m_hat + (1.0 - cfg.rho) * A_w


# ==================== OPERACIONES ====================#
def new_state(shape: tuple[int, int], config: OptimizerConfig,
              layer_id: str | int | None = None) -> LDAdamState:
    """Estado vacío (t = 0, momentos y acumulador en cero, P pendiente)"""
    if len(shape) != 2 or min(shape) < 1:
        raise ConfigurationError(f"Forma de capa inválida: {shape}")
    shape = (int(shape[0]), int(shape[1]))
    side = resolve_side(shape, config.side)
    n, m = shape if side == 'left' else (shape[1], shape[0])
    if config.rank > n:
        raise ConfigurationError(
            f"rank={config.rank} supera la dimensión proyectada {n} de la capa {layer_id} {shape}"
        )
    if config.projection == 'fixed':
        _fixed_basis(config, n)
    return LDAdamState(
        config=config,
        shape=shape,
        side=side,
        A=np.zeros(shape),
        m=np.zeros((config.rank, m)),
        v=np.zeros((config.rank, m)),
        layer_id=layer_id,
    )


def ldadam_accumulate(state: LDAdamState, grad: Matrix) -> None:
    """A += grad, en sitio; se puede llamar varias veces por paso (micro-batches)"""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.shape:
        raise LinalgError(f"Gradiente de forma {grad.shape} para capa {state.layer_id} de forma {state.shape}")
    if not np.all(np.isfinite(grad)):
        raise DivergenceError("Gradiente no finito", layer=state.layer_id, step=state.t + 1)
    np.add(state.A, grad, out=state.A)


def ldadam_init(shape: tuple[int, int], config: OptimizerConfig, first_accumulator: Matrix,
                layer_id: str | int | None = None) -> LDAdamState:
    """Estado nuevo con A₁ = g₁ acumulado y P₀ inicializado a partir de él"""
    state = new_state(shape, config, layer_id)
    ldadam_accumulate(state, first_accumulator)
    _initialize_projection(state)
    return state


def ldadam_fit_subspace(state: LDAdamState) -> tuple[OrthonormalBasis, float]:
    """
    Ajusta P_t a la interpolación entre el momento previo y el acumulador

    practical:  B_t = ρ·P_{t−1}m̂_{t−1} + (1−ρ)·A_t   (m̂ corregido por sesgo, 0 en t=1)
    analytical: b_t = β₁·P_{t−1}m_{t−1} + (1−β₁)·A_t
    Retorna (P_t, q_t) con q_t = residual_ratio(B_t, P_t), 0 si B_t = 0.
    """
    if state.P is None:
        _initialize_projection(state)
    t = state.t + 1
    B = _fit_target(state, t, _momentum_in_full_space(state))

    provider = state.config.projection
    if provider == 'fixed' or not np.any(B):
        P_new = state.P.copy()
    elif provider == 'svd':
        P_new = leading_subspace(B, state.rank)
    else:
        P_new = block_power_iteration_step(B, state.P)

    q = 0.0 if not np.any(B) else residual_ratio(B, P_new)
    return P_new, q


def ldadam_intermediate_first_moment(m_prev: Matrix, P_prev: OrthonormalBasis,
                                     P_new: OrthonormalBasis) -> Matrix:
    """m_{t−1/2} = (P_tᵀ·P_{t−1})·m_{t−1} a través de la matriz de transición r×r"""
    T = P_new.T @ P_prev
    return T @ m_prev


def ldadam_intermediate_second_moment(v_prev: Matrix, m_prev: Matrix, P_prev: OrthonormalBasis,
                                      P_new: OrthonormalBasis, t: int, beta1: float, beta2: float,
                                      negativity: Literal['abs', 'clip_zero'] = 'abs') -> Matrix:
    """
    Transporte del segundo momento al nuevo subespacio

    v_{t−1/2} = (1−β₂^{t−1})·| (T∘T)(v̂ − m̂∘m̂) + (T·m̂)∘(T·m̂) |, T = P_tᵀP_{t−1}.
    En t = 1 el prefactor anula el resultado. Si |T| = I (misma base salvo
    signos) v se conserva tal cual.
    """
    if t < 1:
        raise ValueError(f"t debe ser ≥ 1, recibido {t}")
    if t == 1:
        return np.zeros_like(v_prev)

    T = P_new.T @ P_prev
    r = T.shape[0]
    if T.shape[1] == r and np.array_equal(np.abs(T), np.eye(r)):
        return v_prev.copy()

    c1 = 1.0 - beta1 ** (t - 1)
    c2 = 1.0 - beta2 ** (t - 1)
    m_hat = m_prev / c1
    v_hat = v_prev / c2
    Tm = T @ m_hat
    inner = (T * T) @ (v_hat - m_hat * m_hat) + Tm * Tm
    if negativity == 'clip_zero':
        inner = np.maximum(inner, 0.0)
    else:
        inner = np.abs(inner)
    return c2 * inner


def ldadam_step(state: LDAdamState, params: Matrix, lr: float) -> Matrix:
    """
    Un paso completo de LDAdam; actualiza params en sitio y lo retorna

    Orden: ajuste de subespacio, momentos intermedios, a_t = P_tᵀA_t,
    actualización de momentos, actualización del modelo y carga del
    buffer de error e_{t+1} en A. Nada del estado cambia si la
    actualización resulta no finita.
    """
    if params.shape != state.shape:
        raise LinalgError(f"Parámetros de forma {params.shape} para capa {state.layer_id} de forma {state.shape}")
    cfg = state.config
    beta1, beta2, eps = cfg.beta1, cfg.beta2, cfg.epsilon
    t = state.t + 1

    if state.P is None:
        _initialize_projection(state)
    P_prev = state.P
    A_w = state.working(state.A)
    P_m_prev = P_prev @ state.m
    b_t = beta1 * P_m_prev + (1.0 - beta1) * A_w

    P_new, q = ldadam_fit_subspace(state)
    m_half = ldadam_intermediate_first_moment(state.m, P_prev, P_new)
    v_half = ldadam_intermediate_second_moment(
        state.v, state.m, P_prev, P_new, t, beta1, beta2, negativity=cfg.negativity
    )

    a = P_new.T @ A_w
    m_new = beta1 * m_half + (1.0 - beta1) * a
    v_new = beta2 * v_half + (1.0 - beta2) * (a * a)

    vhat_floor = None
    vhat_max = state.vhat_max
    if cfg.mode == 'analytical':
        vhat_floor = np.maximum(v_new, state.vhat_max)
        vhat_max = max(state.vhat_max, float(np.max(v_new)))
        step_lr = lr * math.sqrt(1.0 - beta2 ** t) / (1.0 - beta1 ** t)
        direction = m_new / np.sqrt(vhat_floor + eps)
        observed_vhat = vhat_max
    else:
        m_hat = m_new / (1.0 - beta1 ** t)
        v_hat = v_new / (1.0 - beta2 ** t)
        step_lr = lr
        direction = m_hat / (np.sqrt(v_hat) + eps)
        observed_vhat = float(np.max(v_hat))

    update = P_new @ direction
    if not np.all(np.isfinite(update)):
        logger.error(f"❌ Actualización no finita en capa {state.layer_id}, paso {t}")
        raise DivergenceError("Actualización no finita", layer=state.layer_id, step=t)

    state.working(params)[...] -= step_lr * update

    if cfg.error_feedback:
        error = (A_w - P_new @ a) + (beta1 / (1.0 - beta1)) * (P_m_prev - P_new @ m_half)
        np.copyto(A_w, error)
        e_norm = float(np.linalg.norm(error))
    else:
        state.A.fill(0.0)
        e_norm = 0.0

    state.P = P_new
    state.m = m_new
    state.v = v_new
    state.vhat_max = vhat_max
    state.t = t

    n, m = state.working_shape
    snapshot = m == 1 and n <= SNAPSHOT_MAX_DIM and vhat_floor is not None
    state.last = StepDiagnostics(
        t=t,
        q=q,
        b_norm=float(np.linalg.norm(b_t)),
        e_norm=e_norm,
        vhat_max=observed_vhat,
        orthonormality_error=orthonormality_error(P_new),
        basis=P_new.copy() if snapshot else None,
        vhat_floor=vhat_floor.ravel().copy() if snapshot else None,
    )
    return params
