import sys

from ldadam.main import main

# Entrada del CLI: python main.py <comando> ...
if __name__ == "__main__":
    sys.exit(main())
