"""
Registros de trayectoria y reportes de monitores
"""
import math
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class TrajectoryRecord:
    """
    Diagnóstico de un paso t

    loss es f(θ_t) antes de la actualización; grad_norm es ‖g_t‖ (suma de
    micro-batches); e_norm es ‖e_{t+1}‖, el buffer que queda tras el paso.
    """
    t: int
    loss: float
    grad_norm: float
    b_norm: float
    e_norm: float
    q: float
    vhat_max: float
    lr: float

    def __post_init__(self):
        values = (self.loss, self.grad_norm, self.b_norm, self.e_norm, self.q, self.vhat_max, self.lr)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"Registro no finito en t={self.t}")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q={self.q} fuera de [0, 1] en t={self.t}")


@dataclass(frozen=True)
class Violation:
    t: int
    quantity: str
    observed: float
    bound: float


@dataclass
class MonitorReport:
    """Resultado de un monitor: pasos revisados, violaciones y valores auxiliares"""
    name: str
    checked: int = 0
    violations: list[Violation] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        status = "✅" if self.passed else "❌"
        return f"{status} {self.name}: {self.checked} revisados, {len(self.violations)} violaciones"

    def to_rows(self, experiment_id: str) -> list[dict[str, Any]]:
        """Filas CSV con clave (experimento, monitor)"""
        base = {'experiment': experiment_id, 'monitor': self.name}
        if not self.violations:
            return [{**base, 'step': '', 'quantity': '', 'observed': '', 'bound': '',
                     'checked': self.checked, 'passed': True}]
        return [
            {**base, 'step': v.t, 'quantity': v.quantity, 'observed': repr(v.observed),
             'bound': repr(v.bound), 'checked': self.checked, 'passed': False}
            for v in self.violations
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            'name': self.name,
            'checked': self.checked,
            'passed': self.passed,
            'violations': len(self.violations),
            'details': self.details,
        }
