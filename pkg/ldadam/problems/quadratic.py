"""
Cuadrática f(θ) = ½(θ−θ*)ᵀH(θ−θ*) con ruido gaussiano aditivo
"""
from typing import Optional, Sequence

import numpy as np

from ldadam.errors import ConfigurationError
from ldadam.linalg import Matrix
from ldadam.problems.base import Params, Problem, flatten, unflatten


def random_spd(d: int, condition_number: float, rng: np.random.Generator) -> Matrix:
    """H = Q·diag(λ)·Qᵀ con λ espaciados geométricamente en [1, κ] y Q ortogonal aleatoria"""
    if d < 1 or condition_number < 1.0:
        raise ConfigurationError(f"Se requiere d ≥ 1 y κ ≥ 1 (d={d}, κ={condition_number})")
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    Q = Q * np.sign(np.diag(R))
    eigenvalues = np.geomspace(1.0, condition_number, d)
    H = (Q * eigenvalues) @ Q.T
    return 0.5 * (H + H.T)


class QuadraticProblem(Problem):
    name = "quadratic"

    def __init__(self, H: Matrix, theta_star: np.ndarray, noise_sigma: float = 0.0,
                 shapes: Optional[Sequence[tuple[int, int]]] = None):
        H = np.asarray(H, dtype=np.float64)
        d = H.shape[0]
        if H.ndim != 2 or H.shape != (d, d):
            raise ConfigurationError(f"H debe ser cuadrada, forma {H.shape}")
        if not np.allclose(H, H.T, rtol=0.0, atol=1e-12 * max(1.0, np.max(np.abs(H)))):
            raise ConfigurationError("H no es simétrica")
        eigenvalues = np.linalg.eigvalsh(H)
        if eigenvalues[0] <= 0.0:
            raise ConfigurationError(f"H no es definida positiva (λ_min = {eigenvalues[0]:.3e})")
        if noise_sigma < 0.0:
            raise ConfigurationError("noise_sigma debe ser ≥ 0")

        self._shapes = [(int(n), int(m)) for n, m in (shapes or [(d, 1)])]
        if sum(n * m for n, m in self._shapes) != d:
            raise ConfigurationError(f"Las formas {self._shapes} no suman d={d}")
        self.H = H
        self.theta_star = np.asarray(theta_star, dtype=np.float64).ravel()
        if self.theta_star.size != d:
            raise ConfigurationError(f"theta_star tiene {self.theta_star.size} entradas, se esperaban {d}")
        self.d = d
        self.noise_sigma = float(noise_sigma)
        self.f_star = 0.0
        self.pl_constant = float(eigenvalues[0])
        self.smoothness = float(eigenvalues[-1])
        self.noise_sigma2 = self.noise_sigma ** 2

    @property
    def param_shapes(self):
        return list(self._shapes)

    def loss(self, params):
        u = flatten(params) - self.theta_star
        return float(0.5 * u @ (self.H @ u))

    def gradient(self, params) -> Params:
        self.check_params(params)
        u = flatten(params) - self.theta_star
        return unflatten(self.H @ u, self._shapes)

    def stochastic_gradient(self, params, rng) -> Params:
        """∇f + 𝒩(0, σ²/d·I), así E‖ruido‖² = σ²"""
        u = flatten(params) - self.theta_star
        noise = rng.normal(0.0, self.noise_sigma / np.sqrt(self.d), self.d) if self.noise_sigma else 0.0
        return unflatten(self.H @ u + noise, self._shapes)

    def hessian_vector(self, v: np.ndarray) -> np.ndarray:
        return self.H @ np.asarray(v, dtype=np.float64).ravel()

    def initial_point(self, rng) -> Params:
        return unflatten(self.theta_star + rng.standard_normal(self.d), self._shapes)

    def coefficients(self) -> tuple[Matrix, np.ndarray, np.ndarray]:
        """(H, b, θ*) con f(θ) = ½θᵀHθ − bᵀθ + ½θ*ᵀHθ* y b = Hθ*"""
        return self.H, self.H @ self.theta_star, self.theta_star


def quadratic_problem(H: Matrix, theta_star: np.ndarray, noise_sigma: float = 0.0,
                      shapes: Optional[Sequence[tuple[int, int]]] = None) -> QuadraticProblem:
    return QuadraticProblem(H, theta_star, noise_sigma, shapes)
