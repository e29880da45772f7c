"""
Validación de los oráculos: diferencias finitas, insesgamiento y cotas de Rayleigh
"""
from typing import Sequence

import numpy as np

from ldadam.errors import ConfigurationError
from ldadam.linalg import Matrix
from ldadam.problems.base import Problem, flatten, unflatten


def finite_diff_check(problem: Problem, theta: Sequence[Matrix], h: float = 1e-5) -> float:
    """
    Máximo error relativo entre el gradiente analítico y diferencias centrales

    Denominador max(|analítico|, 1e-8) por coordenada.
    """
    if h <= 0.0:
        raise ConfigurationError(f"h debe ser > 0, recibido {h}")
    theta = [np.array(p, dtype=np.float64) for p in theta]
    analytic = problem.gradient(theta)

    worst = 0.0
    for param, grad in zip(theta, analytic):
        for idx in np.ndindex(param.shape):
            original = param[idx]
            param[idx] = original + h
            f_plus = problem.loss(theta)
            param[idx] = original - h
            f_minus = problem.loss(theta)
            param[idx] = original
            numeric = (f_plus - f_minus) / (2.0 * h)
            denom = max(abs(grad[idx]), 1e-8)
            worst = max(worst, abs(numeric - grad[idx]) / denom)
    return float(worst)


def unbiasedness_check(problem: Problem, params: Sequence[Matrix], rng: np.random.Generator,
                       draws: int = 10_000) -> float:
    """
    Máximo |z| por coordenada de la media de `draws` gradientes estocásticos
    respecto del gradiente exacto (z = error / (desviación / √draws))

    Coordenadas sin varianza deben coincidir exactamente (z = 0 o inf).
    """
    if draws < 2:
        raise ConfigurationError("Se requieren al menos 2 muestras")
    exact = flatten(problem.gradient(params))
    total = np.zeros_like(exact)
    total_sq = np.zeros_like(exact)
    for _ in range(draws):
        g = flatten(problem.stochastic_gradient(params, rng))
        total += g
        total_sq += g * g
    mean = total / draws
    variance = np.maximum(total_sq / draws - mean * mean, 0.0) * draws / (draws - 1)
    stderr = np.sqrt(variance / draws)
    error = np.abs(mean - exact)

    z = np.zeros_like(error)
    noisy = stderr > 0.0
    z[noisy] = error[noisy] / stderr[noisy]
    z[~noisy & (error > 1e-12 * (1.0 + np.abs(exact)))] = np.inf
    return float(np.max(z))


def rayleigh_bounds_check(problem: Problem, rng: np.random.Generator,
                          probes: int = 100) -> tuple[float, float]:
    """
    Rango empírico de vᵀHv/vᵀv sobre sondas aleatorias

    Usa hessian_vector si el problema lo expone; si no, diferencias del gradiente.
    """
    d = sum(n * m for n, m in problem.param_shapes)
    base = problem.initial_point(rng)
    base_flat = flatten(base)
    hvp = getattr(problem, 'hessian_vector', None)

    quotients = []
    for _ in range(probes):
        v = rng.standard_normal(d)
        if hvp is not None:
            Hv = hvp(v)
        else:
            eps = 1e-6
            shapes = problem.param_shapes
            g_plus = flatten(problem.gradient(unflatten(base_flat + eps * v, shapes)))
            g_minus = flatten(problem.gradient(unflatten(base_flat - eps * v, shapes)))
            Hv = (g_plus - g_minus) / (2.0 * eps)
        quotients.append(float(v @ Hv) / float(v @ v))
    return min(quotients), max(quotients)
