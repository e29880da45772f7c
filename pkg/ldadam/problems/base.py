"""
Interfaz común de los problemas de prueba
"""
from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np

from ldadam.errors import LinalgError
from ldadam.linalg import Matrix

Params = list[Matrix]


def flatten(params: Sequence[Matrix]) -> np.ndarray:
    """Concatena las capas en un vector (orden fila-mayor por capa)"""
    return np.concatenate([np.asarray(p, dtype=np.float64).ravel() for p in params])


def unflatten(vector: np.ndarray, shapes: Sequence[tuple[int, int]]) -> Params:
    sizes = [n * m for n, m in shapes]
    if vector.size != sum(sizes):
        raise LinalgError(f"Vector de tamaño {vector.size} para formas {list(shapes)}")
    out, offset = [], 0
    for (n, m), size in zip(shapes, sizes):
        out.append(vector[offset:offset + size].reshape(n, m).copy())
        offset += size
    return out


class Problem(ABC):
    """
    Objetivo con pérdida determinista y oráculo de gradiente estocástico

    Los parámetros son listas de matrices, nunca vectores aplanados.
    f_star, smoothness (L), pl_constant (μ) y noise_sigma2 (σ²) valen None
    cuando no se conocen.
    """
    name: str = "problem"
    f_star: Optional[float] = None
    smoothness: Optional[float] = None
    pl_constant: Optional[float] = None
    noise_sigma2: Optional[float] = None

    @property
    @abstractmethod
    def param_shapes(self) -> list[tuple[int, int]]:
        ...

    @abstractmethod
    def loss(self, params: Sequence[Matrix]) -> float:
        ...

    @abstractmethod
    def gradient(self, params: Sequence[Matrix]) -> Params:
        """Gradiente exacto de loss"""

    @abstractmethod
    def stochastic_gradient(self, params: Sequence[Matrix], rng: np.random.Generator) -> Params:
        """Estimador insesgado de gradient bajo el modelo de ruido del problema"""

    def initial_point(self, rng: np.random.Generator) -> Params:
        return [rng.standard_normal(shape) for shape in self.param_shapes]

    def dataset(self) -> Optional[tuple[np.ndarray, np.ndarray]]:
        """(X, y) para problemas con datos sintéticos; None si no hay datos"""
        return None

    def check_params(self, params: Sequence[Matrix]) -> None:
        shapes = [np.shape(p) for p in params]
        if shapes != self.param_shapes:
            raise LinalgError(f"Parámetros de formas {shapes}, se esperaban {self.param_shapes}")
