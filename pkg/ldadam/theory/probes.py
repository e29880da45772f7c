"""
Sonda de tasa de convergencia bajo la condición PL
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ldadam.errors import ConfigurationError
from ldadam.optim.config import OptimizerConfig
from ldadam.optim.layerwise import LDAdam
from ldadam.problems.base import Problem, flatten
from ldadam.rng import STREAM_INIT, STREAM_NOISE, make_rng
from ldadam.theory.constants import TheoryConstants, theorem2_step_size
from ldadam.trainer import train

logger = logging.getLogger(__name__)

DEFAULT_HORIZONS = (256, 512, 1024, 2048, 4096, 8192)


@dataclass
class RateProbeResult:
    """Brecha final f(θ_T) − f* por horizonte y semilla, y la pendiente log-log ajustada"""
    horizons: list[int]
    seeds: list[int]
    gaps: dict[int, list[float]] = field(default_factory=dict)
    diverged: list[tuple[int, int]] = field(default_factory=list)
    step_sizes: dict[int, list[float]] = field(default_factory=dict)
    slope: float = float('nan')

    def median_gap(self, T: int) -> float:
        values = [g for g in self.gaps.get(T, []) if math.isfinite(g)]
        return float(np.median(values)) if values else float('nan')


def probe_step_size(C0: float, mu: float, T: int, lr_max: float) -> float:
    """η_T = min(η_max, 2C₀·log T/(μT))"""
    return min(lr_max, 2.0 * C0 * math.log(T) / (mu * T))


def rate_probe(problem: Problem, config: OptimizerConfig, horizons: Sequence[int] = DEFAULT_HORIZONS,
               seeds: Sequence[int] = (1, 2, 3, 4, 5), lr_max: Optional[float] = None,
               constants: Optional[TheoryConstants] = None) -> RateProbeResult:
    """
    Corre LDAdam (modo analítico) con η_T para cada horizonte T y semilla

    Sin `constants`, C₀ se estima como √(‖∇f(θ₁)‖² + ε) en el punto inicial
    de cada semilla y por defecto η_max = C₀/(4L). Con `constants` se usa el
    paso del caso PL, min(η₀, 2C₀·log T/(μT)), con η₀ = lr_max si se da.
    La pendiente se ajusta sobre las medianas positivas y se reporta sin
    afirmarse; una divergencia se registra sin abortar.
    """
    if problem.pl_constant is None or problem.smoothness is None or problem.f_star is None:
        raise ConfigurationError("rate_probe requiere un problema con μ, L y f* conocidos")
    mu, L, f_star = problem.pl_constant, problem.smoothness, problem.f_star
    analytical = config.model_copy(update={'mode': 'analytical'})
    result = RateProbeResult(horizons=list(horizons), seeds=list(seeds))

    for T in horizons:
        result.gaps[T] = []
        result.step_sizes[T] = []
        for seed in seeds:
            params = problem.initial_point(make_rng(seed, STREAM_INIT))
            if constants is not None:
                lr = theorem2_step_size(constants, L, mu, T, eta0=lr_max)
            else:
                g1 = flatten(problem.gradient(params))
                C0 = math.sqrt(float(g1 @ g1) + config.epsilon)
                eta_max = lr_max if lr_max is not None else C0 / (4.0 * L)
                lr = probe_step_size(C0, mu, T, eta_max)
            result.step_sizes[T].append(lr)

            optimizer = LDAdam(analytical, problem.param_shapes)
            run = train(problem, optimizer, params, T, make_rng(seed, STREAM_NOISE), lr=lr)
            if run.diverged:
                result.diverged.append((T, seed))
                result.gaps[T].append(float('nan'))
                continue
            result.gaps[T].append(run.final_loss - f_star)
        logger.info(f"📊 T={T}: brecha mediana {result.median_gap(T):.3e}")

    points = [(math.log(T), math.log(result.median_gap(T)))
              for T in horizons if result.median_gap(T) > 0.0]
    if len(points) >= 2:
        x, y = zip(*points)
        result.slope = float(np.polyfit(x, y, 1)[0])
    return result
