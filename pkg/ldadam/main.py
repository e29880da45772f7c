"""
LDAdam - Punto de entrada del CLI
Registra los subcomandos y traduce excepciones a códigos de salida
"""
import argparse
import logging
import sys
from typing import Optional, Sequence

from ldadam import __version__
from ldadam.commands import EXIT_DIVERGENCE, EXIT_MONITOR, EXIT_USAGE, check, compare, dump_data, memory, run
from ldadam.errors import ConfigurationError, DivergenceError, LDAdamError, MonitorViolation
from ldadam.settings import configure_logging, load_settings

logger = logging.getLogger(__name__)


class CLIArgumentParser(argparse.ArgumentParser):
    """Errores de uso salen con código 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CLIArgumentParser:
    parser = CLIArgumentParser(
        prog='ldadam',
        description="Optimizador adaptativo de baja dimensión: experimentos, monitores y contabilidad de memoria",
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--log-level', help="Nivel de logging (por defecto LDADAM_LOG_LEVEL o INFO)")
    subparsers = parser.add_subparsers(dest='command', required=True, metavar='COMANDO')

    # Registrar subcomandos
    run.register(subparsers)
    compare.register(subparsers)
    memory.register(subparsers)
    check.register(subparsers)
    dump_data.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings()
        configure_logging(args.log_level or settings.log_level)
    except ConfigurationError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE

    # Manejador de errores global
    try:
        return args.handler(args, settings)
    except ConfigurationError as e:
        logger.error(f"❌ Configuración inválida: {e}")
        return EXIT_USAGE
    except DivergenceError as e:
        logger.error(f"❌ Divergencia: {e}")
        return EXIT_DIVERGENCE
    except MonitorViolation as e:
        logger.error(f"❌ {e}")
        return EXIT_MONITOR
    except LDAdamError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
