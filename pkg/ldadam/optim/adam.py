"""
Adam y AMSGrad de referencia (estados completos n×m)
"""
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from ldadam.errors import DivergenceError
from ldadam.linalg import Matrix


@dataclass
class AdamState:
    """Estado de Adam para una capa"""
    t: int
    m: Matrix
    v: Matrix
    vhat: Optional[Matrix] = None
    vhat_max: float = 0.0
    layer: str | int | None = field(default=None, compare=False)

    @classmethod
    def zeros(cls, shape: tuple[int, int], layer: str | int | None = None) -> "AdamState":
        return cls(t=0, m=np.zeros(shape), v=np.zeros(shape), layer=layer)


def _check_finite(x: Matrix, what: str, state: AdamState) -> None:
    if not np.all(np.isfinite(x)):
        raise DivergenceError(f"{what} no finito en Adam", layer=state.layer, step=state.t)


def _update_moments(state: AdamState, grad: Matrix, beta1: float, beta2: float) -> None:
    state.t += 1
    state.m *= beta1
    state.m += (1.0 - beta1) * grad
    state.v *= beta2
    state.v += (1.0 - beta2) * (grad * grad)


def _apply_update(params: Matrix, state: AdamState, second: Matrix, lr: float,
                  beta1: float, beta2: float, epsilon: float) -> Matrix:
    m_hat = state.m / (1.0 - beta1 ** state.t)
    v_hat = second / (1.0 - beta2 ** state.t)
    update = m_hat / (np.sqrt(v_hat) + epsilon)
    _check_finite(update, "Actualización", state)
    params -= lr * update
    return params


def adam_step(state: AdamState, params: Matrix, grad: Matrix, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8) -> Matrix:
    """
    Paso de Adam con corrección de sesgo: θ ← θ − η·m̂/(√v̂ + ε)

    Actualiza params en sitio y lo retorna
    """
    _check_finite(grad, "Gradiente", state)
    _update_moments(state, grad, beta1, beta2)
    return _apply_update(params, state, state.v, lr, beta1, beta2, epsilon)


def amsgrad_step(state: AdamState, params: Matrix, grad: Matrix, lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8,
                 variant: Literal['coordinate', 'uniform'] = 'coordinate') -> Matrix:
    """
    Paso de AMSGrad: igual que Adam pero con v̂ monótono

    coordinate: v̂_t = max(v_t, v̂_{t−1}) por coordenada
    uniform:    v̂_t = max(v_t, ‖v̂_{t−1}‖_max), un único piso escalar por capa
    """
    _check_finite(grad, "Gradiente", state)
    _update_moments(state, grad, beta1, beta2)
    if variant == 'coordinate':
        if state.vhat is None:
            state.vhat = np.zeros_like(state.v)
        np.maximum(state.vhat, state.v, out=state.vhat)
        second = state.vhat
    elif variant == 'uniform':
        second = np.maximum(state.v, state.vhat_max)
        state.vhat_max = max(state.vhat_max, float(np.max(state.v)))
    else:
        raise ValueError(f"Variante de AMSGrad desconocida: {variant}")
    return _apply_update(params, state, second, lr, beta1, beta2, epsilon)
