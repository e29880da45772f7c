"""
Generadores pseudoaleatorios con nombre y semilla explícita

Todos los flujos usan Philox (generador basado en contador) con clave
SeedSequence([seed, *stream]); dos implementaciones que respeten esta
convención producen las mismas secuencias.
"""
import numpy as np

# Identificadores de flujo
STREAM_DATA = 0
STREAM_INIT = 1
STREAM_NOISE = 2
STREAM_GRAM_SCHMIDT = 3


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Crea un generador Philox para (seed, *stream); sin entropía ambiental"""
    if seed is None:
        raise ValueError("La semilla debe ser explícita")
    entropy = [int(seed), *(int(s) for s in stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
