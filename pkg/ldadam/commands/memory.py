"""
Subcomando memory - Memoria de los estados del optimizador
"""
from ldadam.accounting import (
    PUBLISHED_ESTIMATES,
    find_published,
    get_model_spec,
    layer_state_tokens,
    memory_bytes,
    optimizer_state_tokens,
    resolve_model,
)
from ldadam.commands import EXIT_OK
from ldadam.errors import ConfigurationError


def register(subparsers) -> None:
    parser = subparsers.add_parser('memory', help="Tokens y GB de los estados del optimizador")
    parser.add_argument('--model', help="Modelo integrado (roberta-base, llama-130m, llama-350m, llama2-7b) o YAML")
    parser.add_argument('--optimizer', choices=['adam', 'ldadam', 'galore'], default='ldadam')
    parser.add_argument('--rank', type=int, help="Rango r (ldadam/galore)")
    parser.add_argument('--bytes', type=int, choices=[2, 4], default=2, dest='bytes_per_token',
                        help="Bytes por token (2 = media precisión)")
    parser.add_argument('--table', action='store_true', help="Compara todas las cifras publicadas")
    parser.add_argument('--verbose', action='store_true', help="Desglose por capa y divisor SI")
    parser.set_defaults(handler=handle)


def _published_table(bytes_per_token: int) -> None:
    print(f"{'modelo':<14}{'optimizador':<13}{'r':>5}{'calculado':>12}{'publicado':>12}")
    for estimate in PUBLISHED_ESTIMATES:
        tokens = optimizer_state_tokens(get_model_spec(estimate.model), estimate.optimizer, estimate.rank)
        computed = memory_bytes(tokens, bytes_per_token)
        rank = estimate.rank if estimate.rank is not None else '-'
        flag = "" if estimate.reproducible else f"  ⚠️ {estimate.note}"
        print(f"{estimate.model:<14}{estimate.optimizer:<13}{rank:>5}"
              f"{computed.gb:>9.2f} GB{estimate.gb:>9.2f} GB{flag}")


def handle(args, settings) -> int:
    if args.table:
        _published_table(args.bytes_per_token)
        return EXIT_OK
    if not args.model:
        raise ConfigurationError("memory requiere --model (o --table)")
    if args.optimizer != 'adam' and args.rank is None:
        raise ConfigurationError(f"--rank es obligatorio con --optimizer {args.optimizer}")

    model = resolve_model(args.model)
    rank = args.rank if args.optimizer != 'adam' else None
    estimate = memory_bytes(optimizer_state_tokens(model, args.optimizer, rank), args.bytes_per_token)
    label = f"{args.optimizer} (r={rank})" if rank is not None else args.optimizer
    print(f"{model.name} · {label}: {estimate.tokens:,} tokens → {estimate.gb:.2f} GB")

    if args.verbose:
        print(f"  bytes exactos: {estimate.bytes:,} ({estimate.gb_si:.2f} GB con divisor 10⁹)")
        for layer in model.layers:
            tokens = layer_state_tokens(layer, args.optimizer, rank)
            print(f"  {layer.name:<24}{layer.count:>4} × {layer.n}×{layer.m:<8} [{layer.states}] {tokens:>16,}")

    published = find_published(model.name, args.optimizer, rank)
    if published is not None and args.bytes_per_token == 2:
        mark = "✅" if abs(published.gb - estimate.gb) <= 0.01 + 1e-9 else "⚠️"
        note = f" ({published.note})" if published.note else ""
        print(f"  publicado: {published.gb:.2f} GB {mark}{note}")
    return EXIT_OK
