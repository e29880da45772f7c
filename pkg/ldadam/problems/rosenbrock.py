"""
Rosenbrock encadenado por pares (no convexo, f* = 0 en θ = 1)
"""
import numpy as np

from ldadam.errors import ConfigurationError
from ldadam.problems.base import Params, Problem


class RosenbrockProblem(Problem):
    """
    f(θ) = Σ_i 100·(θ_{2i} − θ_{2i−1}²)² + (1 − θ_{2i−1})²

    El oráculo estocástico agrega ruido gaussiano 𝒩(0, σ²/d·I) opcional.
    """
    name = "rosenbrock"

    def __init__(self, d: int, noise_sigma: float = 0.0):
        if d < 2 or d % 2:
            raise ConfigurationError(f"Rosenbrock requiere d ≥ 2 par, recibido {d}")
        self.d = d
        self.noise_sigma = float(noise_sigma)
        self.noise_sigma2 = self.noise_sigma ** 2
        self.f_star = 0.0

    @property
    def param_shapes(self):
        return [(self.d, 1)]

    def loss(self, params):
        x = np.asarray(params[0], dtype=np.float64).ravel()
        odd, even = x[0::2], x[1::2]
        return float(np.sum(100.0 * (even - odd ** 2) ** 2 + (1.0 - odd) ** 2))

    def gradient(self, params) -> Params:
        self.check_params(params)
        x = np.asarray(params[0], dtype=np.float64).ravel()
        odd, even = x[0::2], x[1::2]
        residual = even - odd ** 2
        g = np.empty_like(x)
        g[0::2] = -400.0 * odd * residual - 2.0 * (1.0 - odd)
        g[1::2] = 200.0 * residual
        return [g.reshape(self.d, 1)]

    def stochastic_gradient(self, params, rng) -> Params:
        g = self.gradient(params)[0]
        if self.noise_sigma:
            g = g + rng.normal(0.0, self.noise_sigma / np.sqrt(self.d), g.shape)
        return [g]

    def initial_point(self, rng) -> Params:
        return [rng.uniform(-1.5, 1.5, (self.d, 1))]


def rosenbrock_problem(d: int, noise_sigma: float = 0.0) -> RosenbrockProblem:
    return RosenbrockProblem(d, noise_sigma)
