"""
Métricas Prometheus por corrida

Cada corrida usa su propio CollectorRegistry; el archivo se escribe en
formato de texto con write_to_textfile (sin servidor HTTP).
"""
import logging
from pathlib import Path
from typing import Iterable, Union

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

from ldadam.theory.records import MonitorReport

logger = logging.getLogger(__name__)

STEP_BUCKETS = (1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 0.1, 0.5, 1.0)


class RunMetrics:
    """Contadores, histograma y gauge de una corrida"""

    def __init__(self, experiment: str = "run"):
        self.registry = CollectorRegistry()
        self.experiment = experiment
        self.steps = Counter('ldadam_steps_total', 'Pasos de optimizador completados',
                             ['experiment'], registry=self.registry)
        self.divergences = Counter('ldadam_divergences_total', 'Corridas abortadas por divergencia',
                                   ['experiment'], registry=self.registry)
        self.violations = Counter('ldadam_monitor_violations_total', 'Violaciones reportadas por monitor',
                                  ['experiment', 'monitor'], registry=self.registry)
        self.step_duration = Histogram('ldadam_step_duration_seconds', 'Duración de un paso',
                                       ['experiment'], buckets=STEP_BUCKETS, registry=self.registry)
        self.final_loss = Gauge('ldadam_final_loss', 'Pérdida final f(θ_T)',
                                ['experiment'], registry=self.registry)

    def observe_steps(self, durations: Iterable[float]) -> None:
        histogram = self.step_duration.labels(self.experiment)
        counter = self.steps.labels(self.experiment)
        for seconds in durations:
            histogram.observe(seconds)
            counter.inc()

    def observe_divergence(self) -> None:
        self.divergences.labels(self.experiment).inc()

    def observe_reports(self, reports: Iterable[MonitorReport]) -> None:
        for report in reports:
            # inc(0) deja la serie visible aunque el monitor pase
            self.violations.labels(self.experiment, report.name).inc(len(report.violations))

    def set_final_loss(self, value: float) -> None:
        self.final_loss.labels(self.experiment).set(value)

    def write(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_to_textfile(str(path), self.registry)
        logger.info(f"📊 Métricas escritas en {path}")
