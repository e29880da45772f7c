"""
Subcomando compare - Varias configuraciones sobre el mismo problema y varias semillas
"""
from ldadam.commands import EXIT_DIVERGENCE, EXIT_OK
from ldadam.experiment import compare, load_experiment_config


def register(subparsers) -> None:
    parser = subparsers.add_parser('compare', help="Mediana e IQR de la pérdida final por optimizador")
    parser.add_argument('--config', required=True, nargs='+', help="Archivos YAML (mismo problema)")
    parser.add_argument('--seeds', type=int, nargs='+', default=[1], help="Semillas de cada corrida")
    parser.add_argument('--output', help="CSV de la tabla comparativa")
    parser.add_argument('--threads', type=int, help="Hilos de ejecución (por defecto LDADAM_THREADS o 1)")
    parser.set_defaults(handler=handle)


def handle(args, settings) -> int:
    configs = [load_experiment_config(path) for path in args.config]
    threads = args.threads or settings.threads
    table = compare(configs, args.seeds, threads=threads)
    if args.output:
        table.write_csv(args.output)
    print(table.to_text())
    return EXIT_DIVERGENCE if any(row.diverged for row in table.rows) else EXIT_OK
