"""
GaLore (línea base): Adam en un subespacio que se renueva por SVD cada 𝒯 pasos,
sin transporte de momentos ni retroalimentación de error
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ldadam.errors import ConfigurationError, DivergenceError, LinalgError
from ldadam.linalg import Matrix, OrthonormalBasis, leading_subspace
from ldadam.optim.config import GaLoreConfig
from ldadam.optim.ldadam import Side, resolve_side


@dataclass
class GaLoreState:
    """Estado por capa; t cuenta los pasos ya ejecutados (empieza en 0)"""
    shape: tuple[int, int]
    side: Side
    rank: int
    frequency: int
    m: Matrix
    v: Matrix
    alpha: float = 1.0
    t: int = 0
    P: Optional[OrthonormalBasis] = None
    layer_id: str | int | None = None

    def working(self, X: Matrix) -> Matrix:
        return X if self.side == 'left' else X.T


def new_galore_state(shape: tuple[int, int], config: GaLoreConfig,
                     layer_id: str | int | None = None) -> GaLoreState:
    shape = (int(shape[0]), int(shape[1]))
    side = resolve_side(shape, config.side)
    n, m = shape if side == 'left' else (shape[1], shape[0])
    if config.rank > n:
        raise ConfigurationError(
            f"rank={config.rank} supera la dimensión proyectada {n} de la capa {layer_id} {shape}"
        )
    return GaLoreState(
        shape=shape,
        side=side,
        rank=config.rank,
        frequency=config.frequency,
        m=np.zeros((config.rank, m)),
        v=np.zeros((config.rank, m)),
        alpha=config.alpha,
        layer_id=layer_id,
    )


def galore_step(state: GaLoreState, params: Matrix, grad: Matrix, lr: float,
                beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8) -> Matrix:
    """
    Un paso de GaLore sobre el gradiente completo acumulado

    P se recalcula cuando t mod 𝒯 = 0 (con t antes de incrementar, así que
    la primera llamada siempre la calcula); los momentos se conservan tal cual.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.shape or params.shape != state.shape:
        raise LinalgError(f"Formas inconsistentes para capa {state.layer_id}: {grad.shape}, {params.shape}")
    if not np.all(np.isfinite(grad)):
        raise DivergenceError("Gradiente no finito", layer=state.layer_id, step=state.t + 1)

    g_w = state.working(grad)
    if state.t % state.frequency == 0:
        state.P = leading_subspace(g_w, state.rank)

    t = state.t + 1
    a = state.P.T @ g_w
    m_new = beta1 * state.m + (1.0 - beta1) * a
    v_new = beta2 * state.v + (1.0 - beta2) * (a * a)
    m_hat = m_new / (1.0 - beta1 ** t)
    v_hat = v_new / (1.0 - beta2 ** t)
    update = state.P @ (m_hat / (np.sqrt(v_hat) + epsilon))
    if not np.all(np.isfinite(update)):
        raise DivergenceError("Actualización no finita en GaLore", layer=state.layer_id, step=t)

    state.working(params)[...] -= state.alpha * lr * update
    state.m, state.v, state.t = m_new, v_new, t
    return params
