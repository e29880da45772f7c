"""
Subcomando check - Batería de propiedades
"""
from ldadam.checks import run_checks
from ldadam.commands import EXIT_OK
from ldadam.errors import MonitorViolation


def register(subparsers) -> None:
    parser = subparsers.add_parser('check', help="Chequeos de gradientes, equivalencias y monitores")
    parser.add_argument('--full', action='store_true', help="Tamaños de aceptación y chequeos direccionales")
    parser.set_defaults(handler=handle)


def handle(args, settings) -> int:
    results = run_checks(full=args.full)
    for result in results:
        print(result.line())
    failed = [r.name for r in results if r.failed]
    if failed:
        raise MonitorViolation(f"{len(failed)} chequeo(s) fallaron: {', '.join(failed)}")
    print(f"✅ {len(results)} chequeos completados")
    return EXIT_OK
