"""
Modelos de configuración de los optimizadores y del learning rate
"""
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ==================== MODELOS PYDANTIC ====================#

class Schedule(BaseModel):
    """Calendario de learning rate: rampa lineal desde 0 y luego decaimiento"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    base_lr: float = Field(..., ge=0.0, description="Learning rate máximo")
    warmup_steps: int = Field(0, ge=0, description="Pasos de calentamiento lineal desde 0%")
    decay: Literal['linear_to_zero', 'cosine_to_fraction', 'constant'] = 'constant'
    final_fraction: float = Field(0.1, ge=0.0, le=1.0, description="Fracción final para cosine_to_fraction")
    total_steps: int = Field(..., ge=1)

    @model_validator(mode='after')
    def validate_warmup(self):
        if self.warmup_steps > self.total_steps:
            raise ValueError("warmup_steps no puede superar total_steps")
        return self


class OptimizerConfig(BaseModel):
    """Hiperparámetros de LDAdam (valores por defecto de ajuste fino)"""
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    kind: Literal['ldadam'] = 'ldadam'
    beta1: float = Field(0.908, ge=0.0, lt=1.0)
    beta2: float = Field(0.99, ge=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)
    rank: int = Field(8, ge=1)
    rho: float = Field(0.908, ge=0.0, le=1.0, description="Factor de interpolación del subespacio")
    mode: Literal['practical', 'analytical'] = 'practical'
    error_feedback: bool = True
    projection: Literal['power_iteration', 'svd', 'fixed'] = 'power_iteration'
    fixed_basis: Optional[list[list[float]]] = Field(
        None, description="Base fija n×r para projection=fixed; por defecto [I_r; 0]"
    )
    negativity: Literal['abs', 'clip_zero'] = 'abs'
    side: Literal['auto', 'left', 'right'] = 'auto'
    lr_schedule: Optional[Schedule] = None

    @model_validator(mode='after')
    def validate_fixed_basis(self):
        if self.fixed_basis is not None and self.projection != 'fixed':
            raise ValueError("fixed_basis solo aplica con projection='fixed'")
        if self.fixed_basis is not None:
            widths = {len(row) for row in self.fixed_basis}
            if widths != {self.rank}:
                raise ValueError(f"fixed_basis debe tener exactamente rank={self.rank} columnas")
        return self


class AdamConfig(BaseModel):
    """Hiperparámetros de Adam / AMSGrad (línea base)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal['adam'] = 'adam'
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)
    amsgrad: Literal['none', 'coordinate', 'uniform'] = 'none'
    lr_schedule: Optional[Schedule] = None


class GaLoreConfig(BaseModel):
    """Hiperparámetros de GaLore (sin escalado α por capa)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal['galore'] = 'galore'
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)
    rank: int = Field(8, ge=1)
    frequency: int = Field(200, ge=1, description="Frecuencia de cambio de subespacio 𝒯")
    alpha: float = Field(1.0, gt=0.0)
    side: Literal['auto', 'left', 'right'] = 'auto'
    lr_schedule: Optional[Schedule] = None

    @field_validator('alpha')
    @classmethod
    def validate_alpha(cls, v):
        if v != 1.0:
            raise ValueError("El escalado α por capa no está soportado (α = 1)")
        return v
