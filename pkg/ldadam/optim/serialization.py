"""
Volcado binario plano de estados del optimizador

Formato (little-endian):
    b'LDAS' | u32 versión | u32 número de campos
    por campo: u16 largo del nombre | nombre UTF-8 | u8 ndim | ndim × u64 forma | datos float64 fila-mayor
"""
import io
import struct
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from ldadam.errors import ConfigurationError
from ldadam.optim.adam import AdamState
from ldadam.optim.config import OptimizerConfig
from ldadam.optim.ldadam import LDAdamState, new_state

MAGIC = b'LDAS'
VERSION = 1

_SIDES = {'left': 0.0, 'right': 1.0}


def _read_exact(stream: BinaryIO, size: int) -> bytes:
    data = stream.read(size)
    if len(data) != size:
        raise ConfigurationError("Volcado truncado")
    return data


def dumps_fields(fields: dict[str, np.ndarray]) -> bytes:
    """Serializa un diccionario nombre → arreglo float64"""
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack('<II', VERSION, len(fields)))
    for name, value in fields.items():
        arr = np.ascontiguousarray(np.asarray(value, dtype='<f8'))
        encoded = name.encode('utf-8')
        out.write(struct.pack('<H', len(encoded)))
        out.write(encoded)
        out.write(struct.pack('<B', arr.ndim))
        out.write(struct.pack(f'<{arr.ndim}Q', *arr.shape))
        out.write(arr.tobytes(order='C'))
    return out.getvalue()


def loads_fields(data: bytes) -> dict[str, np.ndarray]:
    stream = io.BytesIO(data)
    if _read_exact(stream, 4) != MAGIC:
        raise ConfigurationError("No es un volcado LDAS")
    version, count = struct.unpack('<II', _read_exact(stream, 8))
    if version != VERSION:
        raise ConfigurationError(f"Versión de volcado no soportada: {version}")

    fields = {}
    for _ in range(count):
        (name_len,) = struct.unpack('<H', _read_exact(stream, 2))
        name = _read_exact(stream, name_len).decode('utf-8')
        (ndim,) = struct.unpack('<B', _read_exact(stream, 1))
        shape = struct.unpack(f'<{ndim}Q', _read_exact(stream, 8 * ndim)) if ndim else ()
        size = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        payload = _read_exact(stream, 8 * size)
        fields[name] = np.frombuffer(payload, dtype='<f8').reshape(shape).astype(np.float64)
    return fields


# ==================== ESTADOS ====================#
def dumps_ldadam_state(state: LDAdamState) -> bytes:
    fields = {
        't': np.array(float(state.t)),
        'shape': np.array(state.shape, dtype=np.float64),
        'side': np.array(_SIDES[state.side]),
        'A': state.A,
        'm': state.m,
        'v': state.v,
        'vhat_max': np.array(state.vhat_max),
    }
    if state.P is not None:
        fields['P'] = state.P
    return dumps_fields(fields)


def loads_ldadam_state(data: bytes, config: OptimizerConfig,
                       layer_id: str | int | None = None) -> LDAdamState:
    """Reconstruye un estado; la configuración no viaja en el volcado"""
    fields = loads_fields(data)
    try:
        shape = tuple(int(x) for x in fields['shape'])
        side = 'right' if float(fields['side']) == _SIDES['right'] else 'left'
        state = new_state(shape, config.model_copy(update={'side': side}), layer_id)
        state.config = config
        state.t = int(fields['t'])
        state.A = fields['A'].copy()
        state.m = fields['m'].copy()
        state.v = fields['v'].copy()
        state.vhat_max = float(fields['vhat_max'])
        state.P = fields['P'].copy() if 'P' in fields else None
    except KeyError as e:
        raise ConfigurationError(f"Falta el campo {e} en el volcado") from e
    if state.m.shape != (config.rank, state.working_shape[1]):
        raise ConfigurationError(f"Momentos de forma {state.m.shape} incompatibles con rank={config.rank}")
    return state


def dumps_adam_state(state: AdamState) -> bytes:
    fields = {
        't': np.array(float(state.t)),
        'm': state.m,
        'v': state.v,
        'vhat_max': np.array(state.vhat_max),
    }
    if state.vhat is not None:
        fields['vhat'] = state.vhat
    return dumps_fields(fields)


def loads_adam_state(data: bytes, layer: str | int | None = None) -> AdamState:
    fields = loads_fields(data)
    try:
        return AdamState(
            t=int(fields['t']),
            m=fields['m'].copy(),
            v=fields['v'].copy(),
            vhat=fields['vhat'].copy() if 'vhat' in fields else None,
            vhat_max=float(fields['vhat_max']),
            layer=layer,
        )
    except KeyError as e:
        raise ConfigurationError(f"Falta el campo {e} en el volcado") from e


def save_state(path: Union[str, Path], state: Union[LDAdamState, AdamState]) -> None:
    data = dumps_ldadam_state(state) if isinstance(state, LDAdamState) else dumps_adam_state(state)
    Path(path).write_bytes(data)


def load_state(path: Union[str, Path], config: OptimizerConfig | None = None,
               layer_id: str | int | None = None) -> Union[LDAdamState, AdamState]:
    """Lee un volcado; con config se interpreta como LDAdamState, sin ella como AdamState"""
    data = Path(path).read_bytes()
    if config is not None:
        return loads_ldadam_state(data, config, layer_id)
    return loads_adam_state(data, layer_id)
