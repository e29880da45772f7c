"""
Subcomando run - Un experimento desde un archivo YAML
"""
import logging
from pathlib import Path

from ldadam.commands import EXIT_DIVERGENCE, EXIT_OK
from ldadam.errors import MonitorViolation
from ldadam.experiment import load_experiment_config, run_experiment

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser('run', help="Ejecuta un experimento y escribe su trayectoria en CSV")
    parser.add_argument('--config', required=True, help="Archivo YAML del experimento")
    parser.add_argument('--output', help="CSV de salida (por defecto el de la configuración o <config>.csv)")
    parser.add_argument('--metrics-file', help="Archivo de métricas Prometheus en formato texto")
    parser.set_defaults(handler=handle)


def handle(args, settings) -> int:
    config = load_experiment_config(args.config)
    output = args.output or config.output or Path(args.config).with_suffix('.csv')
    result = run_experiment(config, output, args.metrics_file)

    summary = result.summary
    if result.diverged:
        print(f"❌ {config.name}: divergencia tras {summary['steps_completed']} pasos ({summary['divergence']})")
        return EXIT_DIVERGENCE
    gap = f", brecha {summary['gap']:.6e}" if summary['gap'] is not None else ""
    print(f"✅ {config.name}: pérdida final {summary['final_loss']:.6e}{gap} ({summary['wall_seconds']:.2f} s)")
    for report in result.reports:
        print(report.summary())
    failing = [report for report in result.reports if not report.passed]
    if failing:
        raise MonitorViolation(f"{len(failing)} monitor(es) con violaciones en {config.name}", reports=failing)
    return EXIT_OK
