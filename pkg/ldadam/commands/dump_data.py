"""
Subcomando dump-data - Exporta el conjunto de datos sintético de un problema
"""
from ldadam.commands import EXIT_OK
from ldadam.experiment import dump_data, load_experiment_config


def register(subparsers) -> None:
    parser = subparsers.add_parser('dump-data', help="Escribe los datos sintéticos del problema en CSV")
    parser.add_argument('--config', required=True, help="Archivo YAML del experimento")
    parser.add_argument('--output', required=True, help="CSV de salida")
    parser.set_defaults(handler=handle)


def handle(args, settings) -> int:
    rows = dump_data(load_experiment_config(args.config), args.output)
    print(f"✅ {rows} filas en {args.output}")
    return EXIT_OK
