"""
Contabilidad exacta de tokens y bytes de los estados del optimizador

Capas proyectadas: min(n,m)·r + 2·r·max(n,m) tokens con LDAdam/GaLore y 2nm con Adam.
Capas sin proyección (embeddings, salida, normalizaciones): 2nm con cualquier optimizador.
"GB" usa el divisor 1024³ para coincidir con las estimaciones publicadas.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ldadam.errors import ConfigurationError

logger = logging.getLogger(__name__)

GIB = 1024 ** 3
GB_SI = 10 ** 9

OptimizerKind = Literal['adam', 'ldadam', 'galore']


# ==================== MODELOS PYDANTIC ====================#
class LayerSpec(BaseModel):
    """Bloque de capas idénticas; states indica qué estados de optimizador lleva"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field(..., min_length=1)
    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    count: int = Field(1, ge=1, description="Multiplicidad")
    states: Literal['projected', 'adam', 'none'] = 'adam'

    @property
    def weights(self) -> int:
        return self.count * self.n * self.m


class ModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field(..., min_length=1)
    layers: list[LayerSpec] = Field(..., min_length=1)

    @property
    def weights(self) -> int:
        return sum(layer.weights for layer in self.layers)


@dataclass(frozen=True)
class MemoryEstimate:
    tokens: int
    bytes_per_token: int
    bytes: int
    gb: float
    gb_si: float

    def __str__(self) -> str:
        return f"{self.gb:.2f} GB"


@dataclass(frozen=True)
class PublishedEstimate:
    """Cifra publicada de memoria de estados en media precisión"""
    model: str
    optimizer: OptimizerKind
    rank: Optional[int]
    gb: float
    reproducible: bool
    note: str = ""


# ==================== OPERACIONES ====================#
def layer_state_tokens(layer: LayerSpec, optimizer: OptimizerKind, rank: Optional[int] = None) -> int:
    if layer.states == 'none':
        return 0
    if layer.states == 'adam' or optimizer == 'adam':
        return 2 * layer.weights
    if rank is None:
        raise ConfigurationError(f"{optimizer} requiere rank")
    small, large = min(layer.n, layer.m), max(layer.n, layer.m)
    if not 1 <= rank <= small:
        raise ConfigurationError(f"rank={rank} fuera de [1, {small}] para la capa {layer.name} ({layer.n}×{layer.m})")
    return layer.count * (small * rank + 2 * rank * large)


def optimizer_state_tokens(model: ModelSpec, optimizer: OptimizerKind, rank: Optional[int] = None) -> int:
    """Tokens de estado del optimizador para el modelo completo"""
    if optimizer not in ('adam', 'ldadam', 'galore'):
        raise ConfigurationError(f"Optimizador desconocido: {optimizer}")
    return sum(layer_state_tokens(layer, optimizer, rank) for layer in model.layers)


def memory_bytes(tokens: int, bytes_per_token: int = 2) -> MemoryEstimate:
    """Bytes exactos y GB (1024³ y 10⁹) redondeados a 2 decimales"""
    if tokens < 0:
        raise ConfigurationError("tokens debe ser ≥ 0")
    if bytes_per_token not in (2, 4):
        raise ConfigurationError(f"bytes_per_token debe ser 2 o 4, recibido {bytes_per_token}")
    total = tokens * bytes_per_token
    return MemoryEstimate(
        tokens=tokens,
        bytes_per_token=bytes_per_token,
        bytes=total,
        gb=round(total / GIB, 2),
        gb_si=round(total / GB_SI, 2),
    )


def compression_ratio(n: int, rank: int) -> float:
    """Estados LDAdam / estados Adam para una capa n×n: 3r/(2n)"""
    return 3.0 * rank / (2.0 * n)


# ==================== ARQUITECTURAS ====================#
def _roberta_base(n_label: int = 2) -> ModelSpec:
    d, ff, blocks = 768, 3072, 12
    return ModelSpec(name='roberta-base', layers=[
        LayerSpec(name='token_embedding', n=50265, m=d),
        LayerSpec(name='token_embedding_bias', n=1, m=d),
        LayerSpec(name='positional_embedding', n=564, m=d),
        LayerSpec(name='attention', n=d, m=d, count=blocks * 4, states='projected'),
        LayerSpec(name='mlp_up', n=d, m=ff, count=blocks * 2, states='projected'),
        LayerSpec(name='mlp_down', n=ff, m=d, count=blocks, states='projected'),
        LayerSpec(name='normalization', n=1, m=2 * d + blocks * (9 * d + ff)),
        LayerSpec(name='dense', n=d, m=d),
        LayerSpec(name='dense_bias', n=1, m=d),
        LayerSpec(name='output', n=d, m=n_label),
        LayerSpec(name='output_bias', n=1, m=n_label),
    ])


def _llama(name: str, d: int, ff: int, blocks: int, mlp_projected: int = 3) -> ModelSpec:
    return ModelSpec(name=name, layers=[
        LayerSpec(name='embedding', n=32000, m=d),
        LayerSpec(name='attention', n=d, m=d, count=blocks * 4, states='projected'),
        LayerSpec(name='mlp', n=d, m=ff, count=blocks * mlp_projected, states='projected'),
        LayerSpec(name='layer_norm', n=1, m=(blocks * 2 + 1) * d),
        LayerSpec(name='output', n=d, m=32000),
    ])


def builtin_model_specs() -> list[ModelSpec]:
    """RoBERTa-base, Llama 130M, Llama 350M y Llama-2 7B"""
    return [
        _roberta_base(),
        _llama('llama-130m', d=768, ff=2048, blocks=12),
        _llama('llama-350m', d=1024, ff=2736, blocks=24),
        _llama('llama2-7b', d=4096, ff=11008, blocks=32),
    ]


def get_model_spec(name: str) -> ModelSpec:
    for spec in builtin_model_specs():
        if spec.name == name:
            return spec
    known = ", ".join(s.name for s in builtin_model_specs())
    raise ConfigurationError(f"Modelo desconocido '{name}' (disponibles: {known})")


def load_model_spec(path: Union[str, Path]) -> ModelSpec:
    """Carga un ModelSpec desde YAML (claves desconocidas son error)"""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"No existe el archivo de modelo: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding='utf-8'))
        return ModelSpec.model_validate(data)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"YAML inválido en {path}: {e}") from e
    except ValidationError as e:
        raise ConfigurationError(f"Especificación de modelo inválida en {path}: {e}") from e


def resolve_model(name_or_path: str) -> ModelSpec:
    """Nombre de un modelo integrado o ruta a un YAML"""
    if name_or_path.endswith(('.yaml', '.yml')) or Path(name_or_path).is_file():
        return load_model_spec(name_or_path)
    return get_model_spec(name_or_path)


# reproducible=False: la cifra publicada no sale de la arquitectura transcrita.
# check_memory_parity no las compara y las lista aparte en su detalle.
PUBLISHED_ESTIMATES: list[PublishedEstimate] = [
    PublishedEstimate('roberta-base', 'adam', None, 0.46, False,
                      "la transcripción de la arquitectura da 0.57 GB"),
    PublishedEstimate('roberta-base', 'ldadam', 8, 0.15, True),
    PublishedEstimate('roberta-base', 'galore', 8, 0.15, True),
    PublishedEstimate('llama-350m', 'adam', None, 1.37, True),
    PublishedEstimate('llama-350m', 'ldadam', 256, 0.95, False,
                      "la transcripción de la arquitectura da 0.61 GB"),
    PublishedEstimate('llama-350m', 'galore', 256, 0.95, False,
                      "la transcripción de la arquitectura da 0.61 GB"),
    PublishedEstimate('llama2-7b', 'adam', None, 25.1, True),
    PublishedEstimate('llama2-7b', 'ldadam', 32, 1.22, True),
    PublishedEstimate('llama2-7b', 'galore', 32, 1.22, True),
    PublishedEstimate('llama2-7b', 'ldadam', 512, 4.87, True),
    PublishedEstimate('llama2-7b', 'galore', 512, 4.87, True),
]


def find_published(model: str, optimizer: str, rank: Optional[int]) -> Optional[PublishedEstimate]:
    """Cifra publicada para (modelo, optimizador, rank); Adam ignora el rank"""
    for estimate in PUBLISHED_ESTIMATES:
        if estimate.model != model or estimate.optimizer != optimizer:
            continue
        if optimizer == 'adam' or estimate.rank == rank:
            return estimate
    return None
