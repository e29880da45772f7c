"""
Optimizadores multicapa: un estado independiente por matriz de parámetros
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ldadam.errors import ConfigurationError, LinalgError
from ldadam.linalg import Matrix, residual_ratio
from ldadam.optim.adam import AdamState, adam_step, amsgrad_step
from ldadam.optim.config import AdamConfig, GaLoreConfig, OptimizerConfig
from ldadam.optim.galore import GaLoreState, galore_step, new_galore_state
from ldadam.optim.ldadam import (
    LDAdamState,
    StepDiagnostics,
    ldadam_accumulate,
    ldadam_step,
    new_state,
)
from ldadam.optim.schedules import schedule_lr

logger = logging.getLogger(__name__)

AnyOptimizerConfig = Union[OptimizerConfig, AdamConfig, GaLoreConfig]


@dataclass
class StepReport:
    """
    Resumen de un paso sobre todas las capas

    Las normas son de Frobenius globales (raíz de la suma de cuadrados por capa);
    q, v̂ y el error de ortonormalidad toman el máximo entre capas.
    """
    t: int
    lr: float
    grad_norm: float
    b_norm: float
    e_norm: float
    q: float
    vhat_max: float
    orthonormality_error: float = 0.0
    layers: list[StepDiagnostics] = field(default_factory=list)


class LayerwiseOptimizer(ABC):
    """Base común: acumulación de micro-batches, learning rate y reporte"""

    def __init__(self, config: AnyOptimizerConfig, shapes: Sequence[tuple[int, int]],
                 layer_ids: Optional[Sequence[str | int]] = None):
        if not shapes:
            raise ConfigurationError("Se requiere al menos una capa")
        self.config = config
        self.shapes = [(int(n), int(m)) for n, m in shapes]
        self.layer_ids = list(layer_ids) if layer_ids is not None else list(range(len(self.shapes)))
        if len(self.layer_ids) != len(self.shapes):
            raise ConfigurationError("layer_ids y shapes deben tener la misma longitud")
        self.t = 0
        self._grads = [np.zeros(s) for s in self.shapes]
        self._pending = False
        self.last_report: Optional[StepReport] = None

    def accumulate(self, grads: Sequence[Matrix]) -> None:
        """Suma un micro-batch de gradientes (uno por capa)"""
        if len(grads) != len(self.shapes):
            raise LinalgError(f"Se esperaban {len(self.shapes)} gradientes, recibidos {len(grads)}")
        for buffer, grad in zip(self._grads, grads):
            grad = np.asarray(grad, dtype=np.float64)
            if grad.shape != buffer.shape:
                raise LinalgError(f"Gradiente de forma {grad.shape}, se esperaba {buffer.shape}")
            buffer += grad
        self._accumulate(grads)
        self._pending = True

    def lr_at(self, t: int) -> float:
        if self.config.lr_schedule is None:
            raise ConfigurationError("No hay lr explícito ni lr_schedule configurado")
        return schedule_lr(self.config.lr_schedule, t)

    def step(self, params: Sequence[Matrix], lr: Optional[float] = None) -> StepReport:
        """Aplica un paso a todas las capas (params se modifica en sitio)"""
        if not self._pending:
            raise ConfigurationError("step() requiere al menos una llamada a accumulate()")
        if len(params) != len(self.shapes):
            raise LinalgError(f"Se esperaban {len(self.shapes)} matrices de parámetros, recibidas {len(params)}")
        t = self.t + 1
        lr = self.lr_at(t) if lr is None else float(lr)
        grad_norm = float(np.sqrt(sum(np.sum(g * g) for g in self._grads)))

        report = self._step(params, lr, t)
        report.grad_norm = grad_norm

        for buffer in self._grads:
            buffer.fill(0.0)
        self._pending = False
        self.t = t
        self.last_report = report
        return report

    def diagnostics(self) -> Optional[StepReport]:
        return self.last_report

    @abstractmethod
    def _accumulate(self, grads: Sequence[Matrix]) -> None:
        ...

    @abstractmethod
    def _step(self, params: Sequence[Matrix], lr: float, t: int) -> StepReport:
        ...


class LDAdam(LayerwiseOptimizer):
    """LDAdam por capa; el acumulador de cada estado guarda el buffer de error entre pasos"""

    def __init__(self, config: OptimizerConfig, shapes, layer_ids=None):
        super().__init__(config, shapes, layer_ids)
        self.states: list[LDAdamState] = [
            new_state(shape, config, layer_id) for shape, layer_id in zip(self.shapes, self.layer_ids)
        ]

    def _accumulate(self, grads):
        for state, grad in zip(self.states, grads):
            ldadam_accumulate(state, grad)

    def _step(self, params, lr, t):
        layers = []
        for state, theta in zip(self.states, params):
            ldadam_step(state, theta, lr)
            layers.append(state.last)
        return StepReport(
            t=t,
            lr=lr,
            grad_norm=0.0,
            b_norm=float(np.sqrt(sum(d.b_norm ** 2 for d in layers))),
            e_norm=float(np.sqrt(sum(d.e_norm ** 2 for d in layers))),
            q=max(d.q for d in layers),
            vhat_max=max(d.vhat_max for d in layers),
            orthonormality_error=max(d.orthonormality_error for d in layers),
            layers=layers,
        )


class Adam(LayerwiseOptimizer):
    """Adam / AMSGrad de referencia con estados completos"""

    def __init__(self, config: AdamConfig, shapes, layer_ids=None):
        super().__init__(config, shapes, layer_ids)
        self.states: list[AdamState] = [
            AdamState.zeros(shape, layer_id) for shape, layer_id in zip(self.shapes, self.layer_ids)
        ]

    def _accumulate(self, grads):
        pass

    def _step(self, params, lr, t):
        cfg = self.config
        vhat_max = 0.0
        for state, theta, grad in zip(self.states, params, self._grads):
            if cfg.amsgrad == 'none':
                adam_step(state, theta, grad, lr, cfg.beta1, cfg.beta2, cfg.epsilon)
                vhat_max = max(vhat_max, float(np.max(state.v)) / (1.0 - cfg.beta2 ** state.t))
            else:
                amsgrad_step(state, theta, grad, lr, cfg.beta1, cfg.beta2, cfg.epsilon, variant=cfg.amsgrad)
                floor = state.vhat_max if cfg.amsgrad == 'uniform' else float(np.max(state.vhat))
                vhat_max = max(vhat_max, floor / (1.0 - cfg.beta2 ** state.t))
        grad_norm = float(np.sqrt(sum(np.sum(g * g) for g in self._grads)))
        return StepReport(t=t, lr=lr, grad_norm=grad_norm, b_norm=grad_norm, e_norm=0.0,
                          q=0.0, vhat_max=vhat_max)


class GaLore(LayerwiseOptimizer):
    """GaLore con renovación del subespacio cada `frequency` pasos"""

    def __init__(self, config: GaLoreConfig, shapes, layer_ids=None):
        super().__init__(config, shapes, layer_ids)
        self.states: list[GaLoreState] = [
            new_galore_state(shape, config, layer_id) for shape, layer_id in zip(self.shapes, self.layer_ids)
        ]

    def _accumulate(self, grads):
        pass

    def _step(self, params, lr, t):
        cfg = self.config
        q = 0.0
        for state, theta, grad in zip(self.states, params, self._grads):
            galore_step(state, theta, grad, lr, cfg.beta1, cfg.beta2, cfg.epsilon)
            g_w = state.working(grad)
            if np.any(g_w):
                q = max(q, residual_ratio(g_w, state.P))
        vhat_max = max(float(np.max(s.v)) / (1.0 - cfg.beta2 ** s.t) for s in self.states)
        grad_norm = float(np.sqrt(sum(np.sum(g * g) for g in self._grads)))
        return StepReport(t=t, lr=lr, grad_norm=grad_norm, b_norm=grad_norm, e_norm=0.0,
                          q=q, vhat_max=vhat_max)


def build_optimizer(config: AnyOptimizerConfig, shapes: Sequence[tuple[int, int]],
                    layer_ids: Optional[Sequence[str | int]] = None) -> LayerwiseOptimizer:
    """Crea el optimizador multicapa según config.kind"""
    if config.kind == 'ldadam':
        optimizer = LDAdam(config, shapes, layer_ids)
    elif config.kind == 'adam':
        optimizer = Adam(config, shapes, layer_ids)
    elif config.kind == 'galore':
        optimizer = GaLore(config, shapes, layer_ids)
    else:
        raise ConfigurationError(f"Tipo de optimizador desconocido: {config.kind}")
    logger.debug(f"✅ Optimizador {config.kind} creado para {len(shapes)} capa(s)")
    return optimizer
