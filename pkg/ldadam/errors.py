"""
Jerarquía de excepciones del paquete
"""


class LDAdamError(Exception):
    """Error base del paquete"""


class ConfigurationError(LDAdamError, ValueError):
    """Configuración inválida (rango, claves desconocidas, archivos faltantes)"""


class LinalgError(LDAdamError, ValueError):
    """Entrada numérica inválida para un kernel de álgebra lineal"""


class DivergenceError(LDAdamError, ArithmeticError):
    """Actualización no finita; incluye la capa y el paso donde ocurrió"""

    def __init__(self, message: str, layer: str | int | None = None, step: int | None = None):
        self.layer = layer
        self.step = step
        detail = message
        if layer is not None or step is not None:
            detail = f"{message} (capa={layer}, paso={step})"
        super().__init__(detail)


class MonitorViolation(LDAdamError):
    """Un monitor o chequeo de propiedades reportó violaciones"""

    def __init__(self, message: str, reports=None):
        self.reports = list(reports or [])
        super().__init__(message)
