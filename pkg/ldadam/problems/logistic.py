"""
Regresión logística con regularización ℓ2 sobre dos clases gaussianas sintéticas
"""
import numpy as np

from ldadam.errors import ConfigurationError
from ldadam.problems.base import Params, Problem
from ldadam.rng import STREAM_DATA, make_rng

DEFAULT_REG = 1e-2


class LogisticProblem(Problem):
    """
    f(w) = (1/N)·Σ log(1 + exp(−y_i·x_iᵀw)) + (λ/2)·‖w‖²

    Etiquetas ±1 equiprobables; x_i ~ 𝒩(y_i·c, I) con c = 1/√p en cada
    coordenada. Los mini-batches se muestrean uniformemente con reemplazo.
    """
    name = "logistic"

    def __init__(self, n_samples: int, n_features: int, seed: int, batch_size: int,
                 reg: float = DEFAULT_REG):
        if n_samples < 1 or n_features < 1:
            raise ConfigurationError("n_samples y n_features deben ser ≥ 1")
        if not 1 <= batch_size <= n_samples:
            raise ConfigurationError(f"batch_size={batch_size} fuera de [1, {n_samples}]")
        if reg < 0.0:
            raise ConfigurationError("reg debe ser ≥ 0")
        rng = make_rng(seed, STREAM_DATA)
        self.y = rng.choice(np.array([-1.0, 1.0]), size=n_samples)
        center = np.full(n_features, 1.0 / np.sqrt(n_features))
        self.X = rng.standard_normal((n_samples, n_features)) + self.y[:, None] * center
        self.n_samples = n_samples
        self.n_features = n_features
        self.batch_size = batch_size
        self.reg = float(reg)

        self.pl_constant = self.reg if self.reg > 0 else None
        top = float(np.linalg.eigvalsh(self.X.T @ self.X)[-1])
        self.smoothness = top / (4.0 * n_samples) + self.reg

    @property
    def param_shapes(self):
        return [(self.n_features, 1)]

    def _loss_on(self, X, y, w) -> float:
        margins = y * (X @ w)
        return float(np.mean(np.logaddexp(0.0, -margins)) + 0.5 * self.reg * (w @ w))

    def _grad_on(self, X, y, w) -> np.ndarray:
        margins = y * (X @ w)
        # σ(−z) = exp(−log(1 + e^z)), estable para |z| grande
        weights = np.exp(-np.logaddexp(0.0, margins))
        return -(X.T @ (y * weights)) / X.shape[0] + self.reg * w

    def loss(self, params):
        return self._loss_on(self.X, self.y, np.asarray(params[0], dtype=np.float64).ravel())

    def gradient(self, params) -> Params:
        self.check_params(params)
        w = np.asarray(params[0], dtype=np.float64).ravel()
        return [self._grad_on(self.X, self.y, w).reshape(-1, 1)]

    def stochastic_gradient(self, params, rng) -> Params:
        w = np.asarray(params[0], dtype=np.float64).ravel()
        idx = rng.integers(0, self.n_samples, size=self.batch_size)
        return [self._grad_on(self.X[idx], self.y[idx], w).reshape(-1, 1)]

    def initial_point(self, rng) -> Params:
        return [np.zeros((self.n_features, 1))]

    def dataset(self):
        return self.X, self.y


def logistic_problem(n_samples: int, n_features: int, seed: int, batch_size: int,
                     reg: float = DEFAULT_REG) -> LogisticProblem:
    return LogisticProblem(n_samples, n_features, seed, batch_size, reg)
