"""
Calendarios de learning rate
"""
import math

from ldadam.errors import ConfigurationError
from ldadam.optim.config import Schedule


def schedule_lr(schedule: Schedule, t: int) -> float:
    """
    η_t para el paso t ∈ [1, total_steps]

    Rampa lineal 0→base_lr durante warmup_steps y luego el decaimiento configurado;
    cosine_to_fraction(f) termina en f·base_lr y linear_to_zero en 0.
    """
    if not 1 <= t <= schedule.total_steps:
        raise ConfigurationError(f"Paso t={t} fuera de [1, {schedule.total_steps}]")

    base = schedule.base_lr
    warmup = schedule.warmup_steps
    if warmup > 0 and t <= warmup:
        return base * t / warmup

    if schedule.decay == 'constant':
        return base

    remaining = schedule.total_steps - warmup
    progress = 1.0 if remaining == 0 else (t - warmup) / remaining
    if schedule.decay == 'linear_to_zero':
        return max(0.0, base * (1.0 - progress))

    f = schedule.final_fraction
    return base * (f + (1.0 - f) * 0.5 * (1.0 + math.cos(math.pi * progress)))
