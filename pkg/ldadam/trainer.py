"""
Bucle de entrenamiento compartido por run, compare, check y las sondas de tasa
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ldadam.errors import DivergenceError, LDAdamError
from ldadam.linalg import Matrix
from ldadam.optim.layerwise import LayerwiseOptimizer, LDAdam, StepReport
from ldadam.problems.base import Params, Problem
from ldadam.theory.records import TrajectoryRecord

logger = logging.getLogger(__name__)

LearningRate = Union[float, Callable[[int], float], None]


@dataclass
class TrainResult:
    """Trayectoria completa (un registro por paso) y estado final"""
    records: list[TrajectoryRecord]
    params: Params
    final_loss: float
    diverged: bool = False
    error: Optional[DivergenceError] = None
    snapshots: dict[int, list[tuple[Matrix, np.ndarray]]] = field(default_factory=dict)
    step_seconds: list[float] = field(default_factory=list)

    @property
    def steps_completed(self) -> int:
        return len(self.records)


def _resolve_lr(lr: LearningRate, t: int) -> Optional[float]:
    if lr is None:
        return None
    return float(lr(t)) if callable(lr) else float(lr)


def _capture(optimizer: LayerwiseOptimizer, snapshots: dict) -> None:
    if not isinstance(optimizer, LDAdam):
        return
    for index, state in enumerate(optimizer.states):
        diag = state.last
        if diag is not None and diag.basis is not None:
            snapshots.setdefault(index, []).append((diag.basis, diag.vhat_floor))


def train(problem: Problem, optimizer: LayerwiseOptimizer, params: Sequence[Matrix], steps: int,
          rng: np.random.Generator, lr: LearningRate = None, micro_batches: int = 1,
          capture_snapshots: bool = False,
          on_step: Optional[Callable[[StepReport], None]] = None) -> TrainResult:
    """
    Ejecuta `steps` pasos; params se actualiza en sitio

    Cada paso acumula `micro_batches` gradientes estocásticos escalados por
    1/micro_batches. Una divergencia (pérdida o actualización no finita)
    detiene el bucle y conserva los registros previos.
    """
    params = [np.asarray(p, dtype=np.float64) for p in params]
    result = TrainResult(records=[], params=params, final_loss=float('nan'))
    scale = 1.0 / micro_batches

    for t in range(1, steps + 1):
        started = time.perf_counter()
        try:
            loss = problem.loss(params)
            if not math.isfinite(loss):
                raise DivergenceError("Pérdida no finita", step=t)
            for _ in range(micro_batches):
                grads = problem.stochastic_gradient(params, rng)
                optimizer.accumulate([g * scale for g in grads] if micro_batches > 1 else grads)
            report = optimizer.step(params, _resolve_lr(lr, t))
            record = TrajectoryRecord(
                t=t,
                loss=loss,
                grad_norm=report.grad_norm,
                b_norm=report.b_norm,
                e_norm=report.e_norm,
                q=min(1.0, max(0.0, report.q)),
                vhat_max=report.vhat_max,
                lr=report.lr,
            )
        except DivergenceError as e:
            logger.error(f"❌ Divergencia en el paso {t}: {e}")
            result.diverged = True
            result.error = e
            return result
        except LDAdamError:
            raise
        except ValueError as e:
            logger.error(f"❌ Diagnóstico no finito en el paso {t}: {e}")
            result.diverged = True
            result.error = DivergenceError(str(e), step=t)
            return result

        result.records.append(record)
        if capture_snapshots:
            _capture(optimizer, result.snapshots)
        if on_step is not None:
            on_step(report)
        result.step_seconds.append(time.perf_counter() - started)

    result.final_loss = problem.loss(params)
    if not math.isfinite(result.final_loss):
        result.diverged = True
        result.error = DivergenceError("Pérdida final no finita", step=steps)
    return result
