"""
Configuración y ejecución de experimentos: run, compare y dump-data

Los archivos de configuración son YAML validados con pydantic; cualquier
clave desconocida es un error. Las semillas son siempre explícitas.
"""
import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Sequence, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ldadam.errors import ConfigurationError
from ldadam.metrics import RunMetrics
from ldadam.optim import AdamConfig, GaLoreConfig, LDAdam, OptimizerConfig, build_optimizer
from ldadam.problems import (
    LogisticProblem,
    MLPProblem,
    Problem,
    QuadraticProblem,
    RosenbrockProblem,
    random_spd,
)
from ldadam.rng import STREAM_DATA, STREAM_INIT, STREAM_NOISE, make_rng
from ldadam.theory import (
    MonitorReport,
    TrajectoryRecord,
    capture_pairs,
    gamma_delta_monitor,
    lemma1_monitor,
    lemma4_monitor,
)
from ldadam.trainer import TrainResult, train

logger = logging.getLogger(__name__)

CSV_HEADER = ['step', 'loss', 'grad_norm', 'b_norm', 'e_norm', 'q_r', 'vhat_max', 'lr']
COMPARE_HEADER = ['experiment', 'optimizer', 'seeds', 'completed', 'diverged',
                  'median_final_loss', 'q25_final_loss', 'q75_final_loss', 'iqr_final_loss']
RECORD_EVERY_THRESHOLD = 10_000


# ==================== MODELOS PYDANTIC ====================#
class QuadraticSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal['quadratic']
    d: int = Field(..., ge=1)
    condition_number: float = Field(10.0, ge=1.0)
    noise_sigma: float = Field(0.0, ge=0.0)
    shapes: Optional[list[tuple[int, int]]] = None
    seed: int = Field(..., description="Semilla de H y θ*")


class RosenbrockSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal['rosenbrock']
    d: int = Field(..., ge=2)
    noise_sigma: float = Field(0.0, ge=0.0)


class LogisticSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal['logistic']
    n_samples: int = Field(..., ge=1)
    n_features: int = Field(..., ge=1)
    batch_size: int = Field(..., ge=1)
    reg: float = Field(1e-2, ge=0.0)
    seed: int = Field(..., description="Semilla del conjunto de datos")


class MLPSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal['mlp']
    widths: list[int] = Field(..., min_length=3, max_length=4)
    n_samples: int = Field(..., ge=1)
    batch_size: int = Field(..., ge=1)
    teacher_rank: int = Field(2, ge=1)
    seed: int = Field(..., description="Semilla de los datos y de la red maestra")


ProblemSpec = Annotated[
    Union[QuadraticSpec, RosenbrockSpec, LogisticSpec, MLPSpec],
    Field(discriminator='kind'),
]
OptimizerSpec = Annotated[
    Union[OptimizerConfig, AdamConfig, GaLoreConfig],
    Field(discriminator='kind'),
]
MonitorName = Literal['lemma1', 'lemma4', 'gamma_delta']


class ExperimentConfig(BaseModel):
    """Un experimento: problema, optimizador, horizonte y salidas"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field("experiment", min_length=1)
    seed: int = Field(..., description="Semilla de θ₀ y del ruido de gradiente")
    problem: ProblemSpec
    optimizer: OptimizerSpec
    steps: int = Field(..., ge=1)
    micro_batches: int = Field(1, ge=1)
    record_every: Optional[int] = Field(None, ge=1)
    lr: Optional[float] = Field(None, gt=0.0, description="Learning rate constante; si falta se usa lr_schedule")
    monitors: list[MonitorName] = Field(default_factory=list)
    capture: bool = Field(False, description="Escribe el par (r/d, 1 − q̄) de la corrida")
    output: Optional[str] = None

    @model_validator(mode='after')
    def validate_learning_rate(self):
        schedule = self.optimizer.lr_schedule
        if self.lr is None and schedule is None:
            raise ValueError("Se requiere lr o optimizer.lr_schedule")
        if self.lr is None and schedule.total_steps < self.steps:
            raise ValueError(f"lr_schedule.total_steps={schedule.total_steps} < steps={self.steps}")
        return self

    @model_validator(mode='after')
    def validate_monitors(self):
        if self.monitors and self.optimizer.kind != 'ldadam':
            raise ValueError("Los monitores solo aplican a optimizer.kind='ldadam'")
        if len(set(self.monitors)) != len(self.monitors):
            raise ValueError("monitors contiene duplicados")
        return self

    @property
    def resolved_record_every(self) -> int:
        if self.record_every is not None:
            return self.record_every
        return 1 if self.steps <= RECORD_EVERY_THRESHOLD else 10


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    train: TrainResult
    reports: list[MonitorReport]
    summary: dict[str, Any]
    csv_path: Optional[Path] = None

    @property
    def records(self) -> list[TrajectoryRecord]:
        return self.train.records

    @property
    def diverged(self) -> bool:
        return self.train.diverged

    @property
    def monitors_passed(self) -> bool:
        return all(report.passed for report in self.reports)


@dataclass
class ComparisonRow:
    experiment: str
    optimizer: str
    seeds: list[int]
    final_losses: list[float]
    diverged: int = 0
    median: float = math.nan
    q25: float = math.nan
    q75: float = math.nan

    @property
    def iqr(self) -> float:
        return self.q75 - self.q25


@dataclass
class ComparisonTable:
    """Una fila por configuración, en el orden de entrada"""
    seeds: list[int]
    rows: list[ComparisonRow] = field(default_factory=list)

    def to_text(self) -> str:
        header = ['experiment', 'optimizer', 'median', 'q25', 'q75', 'iqr', 'diverged']
        body = [
            [row.experiment, row.optimizer, f"{row.median:.6e}", f"{row.q25:.6e}",
             f"{row.q75:.6e}", f"{row.iqr:.6e}", f"{row.diverged}/{len(row.seeds)}"]
            for row in self.rows
        ]
        widths = [max(len(str(line[i])) for line in [header, *body]) for i in range(len(header))]
        lines = ["  ".join(str(cell).ljust(w) for cell, w in zip(line, widths)).rstrip()
                 for line in [header, *body]]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)

    def write_csv(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(COMPARE_HEADER)
            for row in self.rows:
                writer.writerow([row.experiment, row.optimizer, len(row.seeds),
                                 len(row.seeds) - row.diverged, row.diverged,
                                 _fmt(row.median), _fmt(row.q25), _fmt(row.q75), _fmt(row.iqr)])
        runs_path = path.with_name(f"{path.stem}.runs.csv")
        with runs_path.open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(['experiment', 'seed', 'final_loss'])
            for row in self.rows:
                for seed, loss in zip(row.seeds, row.final_losses):
                    writer.writerow([row.experiment, seed, _fmt(loss)])


# ==================== CARGA DE CONFIGURACIÓN ====================#
def _read_yaml(path: Path) -> Any:
    if not path.is_file():
        raise ConfigurationError(f"No existe el archivo de configuración: {path}")
    try:
        return yaml.safe_load(path.read_text(encoding='utf-8'))
    except yaml.YAMLError as e:
        raise ConfigurationError(f"YAML inválido en {path}: {e}") from e


def parse_experiment_config(data: Any, source: str = "<dict>") -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"Configuración inválida en {source}:\n{e}") from e


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    return parse_experiment_config(_read_yaml(path), str(path))


def build_problem(spec: Union[QuadraticSpec, RosenbrockSpec, LogisticSpec, MLPSpec]) -> Problem:
    """Instancia el problema; los datos sintéticos salen del flujo DATA de la semilla del problema"""
    if spec.kind == 'quadratic':
        rng = make_rng(spec.seed, STREAM_DATA)
        H = random_spd(spec.d, spec.condition_number, rng)
        theta_star = rng.standard_normal(spec.d)
        return QuadraticProblem(H, theta_star, spec.noise_sigma, spec.shapes)
    if spec.kind == 'rosenbrock':
        return RosenbrockProblem(spec.d, spec.noise_sigma)
    if spec.kind == 'logistic':
        return LogisticProblem(spec.n_samples, spec.n_features, spec.seed, spec.batch_size, spec.reg)
    if spec.kind == 'mlp':
        return MLPProblem(spec.widths, spec.n_samples, spec.seed, spec.batch_size, spec.teacher_rank)
    raise ConfigurationError(f"Problema desconocido: {spec.kind}")


# ==================== SALIDAS ====================#
def _fmt(value: float) -> str:
    return '%.17g' % value


def _companion(csv_path: Path, suffix: str) -> Path:
    return csv_path.with_name(f"{csv_path.stem}.{suffix}")


def write_trajectory_csv(path: Path, records: Sequence[TrajectoryRecord], record_every: int) -> int:
    """Escribe las filas t = 1, múltiplos de record_every y el último paso; retorna cuántas"""
    path.parent.mkdir(parents=True, exist_ok=True)
    last = records[-1].t if records else 0
    written = 0
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for record in records:
            if record.t != 1 and record.t % record_every and record.t != last:
                continue
            writer.writerow([record.t, _fmt(record.loss), _fmt(record.grad_norm), _fmt(record.b_norm),
                             _fmt(record.e_norm), _fmt(record.q), _fmt(record.vhat_max), _fmt(record.lr)])
            written += 1
    return written


def write_monitor_csv(path: Path, experiment: str, reports: Sequence[MonitorReport]) -> None:
    columns = ['experiment', 'monitor', 'step', 'quantity', 'observed', 'bound', 'checked', 'passed']
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, lineterminator='\n')
        writer.writeheader()
        for report in reports:
            writer.writerows(report.to_rows(experiment))


# ==================== OPERACIONES ====================#
def _run_monitors(config: ExperimentConfig, result: TrainResult) -> list[MonitorReport]:
    cfg = config.optimizer
    reports = []
    if config.monitors and getattr(cfg, 'mode', None) != 'analytical':
        logger.warning("⚠️ Los monitores asumen modo analítico; los veredictos son orientativos")
    for name in config.monitors:
        if name == 'lemma1':
            reports.append(lemma1_monitor(result.records, cfg.beta1))
        elif name == 'lemma4':
            reports.append(lemma4_monitor(result.records, cfg.beta1, cfg.beta2))
        elif name == 'gamma_delta':
            if not result.snapshots:
                logger.warning("⚠️ gamma_delta sin instantáneas (requiere capas vectoriales d ≤ 128 en modo analítico)")
                reports.append(MonitorReport(name='gamma_delta'))
            for layer, snapshots in sorted(result.snapshots.items()):
                report = gamma_delta_monitor(snapshots, cfg.epsilon)
                if len(result.snapshots) > 1:
                    report.name = f"gamma_delta[{layer}]"
                reports.append(report)
    return reports


def _capture_pair(config: ExperimentConfig, optimizer, records) -> Optional[tuple[float, float]]:
    if not isinstance(optimizer, LDAdam) or not records:
        return None
    dim = max(state.working_shape[0] for state in optimizer.states)
    return capture_pairs([(records, config.optimizer.rank, dim)])[0]


def execute(config: ExperimentConfig) -> tuple[TrainResult, list[MonitorReport], Any]:
    """Corre el experimento en memoria (sin escribir archivos)"""
    problem = build_problem(config.problem)
    params = problem.initial_point(make_rng(config.seed, STREAM_INIT))
    optimizer = build_optimizer(config.optimizer, problem.param_shapes)
    result = train(
        problem,
        optimizer,
        params,
        config.steps,
        make_rng(config.seed, STREAM_NOISE),
        lr=config.lr,
        micro_batches=config.micro_batches,
        capture_snapshots='gamma_delta' in config.monitors,
    )
    return result, _run_monitors(config, result), (problem, optimizer)


def run_experiment(config: ExperimentConfig, output: Optional[Union[str, Path]] = None,
                   metrics_file: Optional[Union[str, Path]] = None) -> ExperimentResult:
    """
    Corre un experimento y, si hay ruta de salida, escribe CSV, resumen y monitores

    El CSV de trayectoria es determinista dado el config. Una divergencia deja
    el CSV parcial (solo filas finitas) y se reporta en el resumen.
    """
    started = time.perf_counter()
    result, reports, (problem, optimizer) = execute(config)
    wall = time.perf_counter() - started

    final_loss = result.final_loss if not result.diverged else None
    summary: dict[str, Any] = {
        'experiment': config.name,
        'optimizer': config.optimizer.kind,
        'problem': config.problem.kind,
        'seed': config.seed,
        'steps': config.steps,
        'steps_completed': result.steps_completed,
        'final_loss': final_loss,
        'gap': final_loss - problem.f_star if final_loss is not None and problem.f_star is not None else None,
        'diverged': result.diverged,
        'divergence': str(result.error) if result.error is not None else None,
        'monitors': [report.to_dict() for report in reports],
        'record_every': config.resolved_record_every,
        'wall_seconds': wall,
    }
    pair = _capture_pair(config, optimizer, result.records) if config.capture else None
    if pair is not None:
        summary['capture'] = {'rank_over_dim': pair[0], 'one_minus_q_bar': pair[1]}

    csv_path = Path(output) if output is not None else (Path(config.output) if config.output else None)
    if csv_path is not None:
        rows = write_trajectory_csv(csv_path, result.records, config.resolved_record_every)
        _companion(csv_path, 'summary.json').write_text(
            json.dumps(summary, indent=2, ensure_ascii=False, default=float), encoding='utf-8'
        )
        if reports:
            write_monitor_csv(_companion(csv_path, 'monitors.csv'), config.name, reports)
        if pair is not None:
            with _companion(csv_path, 'capture.csv').open('w', newline='', encoding='utf-8') as handle:
                writer = csv.writer(handle, lineterminator='\n')
                writer.writerow(['experiment', 'rank_over_dim', 'one_minus_q_bar'])
                writer.writerow([config.name, _fmt(pair[0]), _fmt(pair[1])])
        logger.info(f"✅ {rows} filas escritas en {csv_path}")

    if metrics_file is not None:
        metrics = RunMetrics(config.name)
        metrics.observe_steps(result.step_seconds)
        metrics.observe_reports(reports)
        if result.diverged:
            metrics.observe_divergence()
        else:
            metrics.set_final_loss(result.final_loss)
        metrics.write(metrics_file)

    for report in reports:
        logger.info(report.summary())
    return ExperimentResult(config=config, train=result, reports=reports, summary=summary, csv_path=csv_path)


def _labels(configs: Sequence[ExperimentConfig]) -> list[str]:
    labels = []
    for index, config in enumerate(configs):
        label = config.name
        if label in labels or sum(c.name == label for c in configs) > 1:
            label = f"{config.name}#{index + 1}"
        labels.append(label)
    return labels


def compare(configs: Sequence[ExperimentConfig], seeds: Sequence[int],
            threads: Optional[int] = None) -> ComparisonTable:
    """
    Corre cada configuración con cada semilla y resume la pérdida final

    Todas las configuraciones deben compartir el mismo problema. Las corridas
    pueden ejecutarse en paralelo; el orden de salida es siempre el de entrada.
    """
    if not configs:
        raise ConfigurationError("compare requiere al menos una configuración")
    if not seeds:
        raise ConfigurationError("compare requiere al menos una semilla")
    reference = configs[0].problem
    for config in configs[1:]:
        if config.problem != reference:
            raise ConfigurationError(
                f"Las configuraciones no comparten problema: '{configs[0].name}' vs '{config.name}'"
            )

    tasks = [(i, seed) for i in range(len(configs)) for seed in seeds]
    workers = max(1, threads or 1)

    def run_one(task: tuple[int, int]) -> TrainResult:
        index, seed = task
        result, _, _ = execute(configs[index].model_copy(update={'seed': seed, 'monitors': []}))
        return result

    logger.info(f"📊 compare: {len(configs)} configuraciones × {len(seeds)} semillas con {workers} hilo(s)")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = dict(zip(tasks, pool.map(run_one, tasks)))

    table = ComparisonTable(seeds=list(seeds))
    for index, (config, label) in enumerate(zip(configs, _labels(configs))):
        losses = [math.nan if outcomes[(index, s)].diverged else outcomes[(index, s)].final_loss for s in seeds]
        finite = np.array([x for x in losses if math.isfinite(x)])
        row = ComparisonRow(experiment=label, optimizer=config.optimizer.kind, seeds=list(seeds),
                            final_losses=losses, diverged=len(losses) - finite.size)
        if finite.size:
            row.median = float(np.median(finite))
            row.q25, row.q75 = (float(x) for x in np.percentile(finite, [25, 75]))
        table.rows.append(row)
    return table


def _write_rows(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def dump_data(config: ExperimentConfig, output: Union[str, Path]) -> int:
    """
    Escribe los datos sintéticos del problema como CSV; retorna el número de filas

    Problemas con muestras: columnas x0.., y0... Cuadrática: una fila por
    coordenada con la fila de H (h0..), b = Hθ* y θ*.
    """
    problem = build_problem(config.problem)
    path = Path(output)
    if isinstance(problem, QuadraticProblem):
        H, b, theta_star = problem.coefficients()
        header = [f"h{j}" for j in range(problem.d)] + ['b', 'theta_star']
        _write_rows(path, header, (list(H[i]) + [b[i], theta_star[i]] for i in range(problem.d)))
        logger.info(f"✅ Cuadrática d={problem.d} escrita en {path}")
        return problem.d

    data = problem.dataset()
    if data is None:
        raise ConfigurationError(f"El problema '{config.problem.kind}' no tiene datos que exportar")
    X, Y = (np.asarray(a, dtype=np.float64) for a in data)
    Y = Y.reshape(X.shape[0], -1)
    header = [f"x{j}" for j in range(X.shape[1])] + [f"y{j}" for j in range(Y.shape[1])]
    _write_rows(path, header, (list(x_row) + list(y_row) for x_row, y_row in zip(X, Y)))
    logger.info(f"✅ {X.shape[0]} muestras escritas en {path}")
    return int(X.shape[0])
