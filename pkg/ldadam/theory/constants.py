"""
Constantes de los teoremas de convergencia, tamaños de paso y cotas de tasa
"""
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ldadam.errors import ConfigurationError
from ldadam.problems.base import Problem, flatten
from ldadam.theory.records import TrajectoryRecord


@dataclass(frozen=True)
class TheoryConstants:
    G: float
    q_bar: float
    C0: float
    C1: float
    C2: float
    sigma2: float
    beta1: float
    beta2: float
    epsilon: float


def compute_constants(G: float, q_bar: float, beta1: float, beta2: float, epsilon: float,
                      sigma2: float = 0.0) -> TheoryConstants:
    """
    C₀ = √((1+β₂)/(1−β₂) · (1−β₁(1−q))²/((1−β₁)²(1−q)²) · G² + ε)
    C₁ = (β₁ + (1−β₁)q)/((1−β₁)(1−q))
    C₂ = (β₁ + (1−β₁)q²)/((1−β₁)²(1−q)²)
    """
    if not 0.0 <= q_bar < 1.0:
        raise ConfigurationError(f"q̄ debe estar en [0, 1), recibido {q_bar}")
    if G < 0.0:
        raise ConfigurationError("G debe ser ≥ 0")
    one_q = 1.0 - q_bar
    one_b1 = 1.0 - beta1
    growth = (1.0 - beta1 * one_q) ** 2 / (one_b1 ** 2 * one_q ** 2)
    C0 = math.sqrt((1.0 + beta2) / (1.0 - beta2) * growth * G ** 2 + epsilon)
    C1 = (beta1 + one_b1 * q_bar) / (one_b1 * one_q)
    C2 = (beta1 + one_b1 * q_bar ** 2) / (one_b1 ** 2 * one_q ** 2)
    return TheoryConstants(G=G, q_bar=q_bar, C0=C0, C1=C1, C2=C2, sigma2=sigma2,
                           beta1=beta1, beta2=beta2, epsilon=epsilon)


def constants_from_trajectory(records: Sequence[TrajectoryRecord], beta1: float, beta2: float,
                              epsilon: float, sigma2: float = 0.0) -> TheoryConstants:
    """Constantes con G = max‖g_t‖ y q̄ = max q_t observados"""
    G = max((r.grad_norm for r in records), default=0.0)
    q_bar = max((r.q for r in records), default=0.0)
    return compute_constants(G, q_bar, beta1, beta2, epsilon, sigma2)


# ==================== TAMAÑOS DE PASO ====================#
def theorem1_step_size(c: TheoryConstants, L: float, T: int) -> float:
    """η = min(ε/(4LC₀√(1+C₂)), 1/√T) (caso no convexo)"""
    return min(c.epsilon / (4.0 * L * c.C0 * math.sqrt(1.0 + c.C2)), 1.0 / math.sqrt(T))


def pl_base_step_size(c: TheoryConstants, L: float, mu: float) -> float:
    """η₀ = min(ε/(16LC₀), C₀(1−β₁)(1−q)/(2μ), ε^{3/4}/(6L√(C₀C₂)))"""
    return min(
        c.epsilon / (16.0 * L * c.C0),
        c.C0 * (1.0 - c.beta1) * (1.0 - c.q_bar) / (2.0 * mu),
        c.epsilon ** 0.75 / (6.0 * L * math.sqrt(c.C0 * c.C2)),
    )


def theorem2_step_size(c: TheoryConstants, L: float, mu: float, T: int,
                       eta0: Optional[float] = None) -> float:
    """η = min(η₀, 2C₀·log T/(μT)) (caso PL)"""
    if eta0 is None:
        eta0 = pl_base_step_size(c, L, mu)
    return min(eta0, 2.0 * c.C0 * math.log(T) / (mu * T))


def nonconvex_rate_bound(c: TheoryConstants, L: float, initial_gap: float, T: int) -> float:
    """Término principal 2C₀/√T·(f(θ₁) − f* + Lσ²/ε)"""
    return 2.0 * c.C0 / math.sqrt(T) * (initial_gap + L * c.sigma2 / c.epsilon)


def pl_rate_bound(c: TheoryConstants, L: float, mu: float, T: int) -> float:
    """Término principal log T/T·(2LC₀²σ²/(μ²ε) + 6C₀(1+C₁)G²/(μ√ε))"""
    return math.log(T) / T * (
        2.0 * L * c.C0 ** 2 * c.sigma2 / (mu ** 2 * c.epsilon)
        + 6.0 * c.C0 * (1.0 + c.C1) * c.G ** 2 / (mu * math.sqrt(c.epsilon))
    )


# ==================== RUIDO Y CAPTURA ====================#
def estimate_sigma2(problem: Problem, params, rng: np.random.Generator, draws: int = 256) -> float:
    """E‖g − ∇f‖² estimado con `draws` muestras en params"""
    exact = flatten(problem.gradient(params))
    total = 0.0
    for _ in range(draws):
        diff = flatten(problem.stochastic_gradient(params, rng)) - exact
        total += float(diff @ diff)
    return total / draws


def resolve_sigma2(problem: Problem, params, rng: np.random.Generator, draws: int = 256) -> float:
    """σ² declarado por el problema o, si no lo hay, estimado en params"""
    if problem.noise_sigma2 is not None:
        return float(problem.noise_sigma2)
    return estimate_sigma2(problem, params, rng, draws)


def capture_pairs(runs: Iterable[tuple[Sequence[TrajectoryRecord], int, int]]) -> list[tuple[float, float]]:
    """
    Pares (r/d, 1 − q̄) por corrida, para el diagrama de dispersión descriptivo

    No se afirma ninguna relación entre ambos valores.
    """
    pairs = []
    for records, rank, dim in runs:
        q_bar = max((r.q for r in records), default=0.0)
        pairs.append((rank / dim, 1.0 - q_bar))
    return pairs
