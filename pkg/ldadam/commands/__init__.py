"""
Subcomandos del CLI; cada módulo expone register(subparsers)
"""
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DIVERGENCE = 2
EXIT_MONITOR = 3
