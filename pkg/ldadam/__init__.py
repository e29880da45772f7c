"""
LDAdam - Optimizador adaptativo de baja dimensión
Librería y CLI: optimizadores, problemas de prueba, monitores teóricos y contabilidad de memoria
"""
__version__ = "1.0.0"
