"""
Regresión con MLP tanh (2 o 3 capas, salida lineal) sobre datos de un maestro de bajo rango
Gradientes por capa con retropropagación escrita a mano
"""
from typing import Sequence

import numpy as np

from ldadam.errors import ConfigurationError
from ldadam.problems.base import Params, Problem
from ldadam.rng import STREAM_DATA, make_rng


class MLPProblem(Problem):
    """
    f(W) = 1/(2N)·Σ‖h_L(x_i) − y_i‖², h_0 = x, h_l = tanh(h_{l−1}·W_l), salida lineal

    W_l tiene forma (widths[l−1], widths[l]). Los objetivos y los genera
    una red maestra de la misma arquitectura con pesos de rango teacher_rank,
    por lo que f* = 0.
    """
    name = "mlp"

    def __init__(self, widths: Sequence[int], n_samples: int, seed: int, batch_size: int,
                 teacher_rank: int = 2):
        widths = [int(w) for w in widths]
        if len(widths) not in (3, 4) or min(widths) < 1:
            raise ConfigurationError(f"widths debe describir 2 o 3 capas, recibido {widths}")
        if not 1 <= batch_size <= n_samples:
            raise ConfigurationError(f"batch_size={batch_size} fuera de [1, {n_samples}]")
        self.widths = widths
        self.n_samples = n_samples
        self.batch_size = batch_size
        self.f_star = 0.0

        rng = make_rng(seed, STREAM_DATA)
        self.X = rng.standard_normal((n_samples, widths[0]))
        self.teacher = []
        for n, m in self.param_shapes:
            k = max(1, min(teacher_rank, n, m))
            U = rng.standard_normal((n, k))
            V = rng.standard_normal((k, m))
            self.teacher.append(U @ V / np.sqrt(n * k))
        self.Y = self._forward(self.X, self.teacher)[-1]

    @property
    def param_shapes(self):
        return [(self.widths[i], self.widths[i + 1]) for i in range(len(self.widths) - 1)]

    @staticmethod
    def _forward(X: np.ndarray, weights: Sequence[np.ndarray]) -> list[np.ndarray]:
        activations = [X]
        for i, W in enumerate(weights):
            z = activations[-1] @ W
            activations.append(z if i == len(weights) - 1 else np.tanh(z))
        return activations

    def _loss_on(self, X, Y, weights) -> float:
        out = self._forward(X, weights)[-1]
        return float(0.5 * np.sum((out - Y) ** 2) / X.shape[0])

    def _grad_on(self, X, Y, weights) -> Params:
        activations = self._forward(X, weights)
        delta = (activations[-1] - Y) / X.shape[0]
        grads = [None] * len(weights)
        for i in range(len(weights) - 1, -1, -1):
            grads[i] = activations[i].T @ delta
            if i > 0:
                delta = (delta @ weights[i].T) * (1.0 - activations[i] ** 2)
        return grads

    def loss(self, params):
        return self._loss_on(self.X, self.Y, params)

    def gradient(self, params) -> Params:
        self.check_params(params)
        return self._grad_on(self.X, self.Y, params)

    def stochastic_gradient(self, params, rng) -> Params:
        idx = rng.integers(0, self.n_samples, size=self.batch_size)
        return self._grad_on(self.X[idx], self.Y[idx], params)

    def initial_point(self, rng) -> Params:
        return [rng.standard_normal((n, m)) / np.sqrt(n) for n, m in self.param_shapes]

    def dataset(self):
        return self.X, self.Y


def mlp_problem(widths: Sequence[int], n_samples: int, seed: int, batch_size: int,
                teacher_rank: int = 2) -> MLPProblem:
    return MLPProblem(widths, n_samples, seed, batch_size, teacher_rank)
