"""
Configuración del entorno de ejecución
Carga variables desde .env y configura el logging del CLI
"""
import os
import logging
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from ldadam.errors import ConfigurationError

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Settings(BaseModel):
    """Variables de entorno reconocidas (todas opcionales)"""
    threads: Optional[int] = Field(None, ge=1, description="Hilos para compare (LDADAM_THREADS)")
    log_level: str = Field("INFO", description="Nivel de logging (LDADAM_LOG_LEVEL)")

    @field_validator('log_level')
    @classmethod
    def validate_log_level(cls, v):
        v = v.upper()
        if v not in ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']:
            raise ValueError(f"Nivel de logging inválido: {v}")
        return v


def load_settings(env_file: Optional[str] = None) -> Settings:
    """
    Lee LDADAM_THREADS y LDADAM_LOG_LEVEL (desde .env si existe)
    Ninguna otra variable de entorno afecta el comportamiento
    """
    load_dotenv(env_file)
    raw_threads = os.getenv('LDADAM_THREADS')
    try:
        return Settings(
            threads=int(raw_threads) if raw_threads else None,
            log_level=os.getenv('LDADAM_LOG_LEVEL', 'INFO'),
        )
    except (ValueError, ValidationError) as e:
        raise ConfigurationError(f"Variables de entorno inválidas: {e}") from e


def configure_logging(level: str = 'INFO') -> None:
    """Configura el logging raíz una sola vez (lo llama el CLI, nunca la librería)"""
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)
