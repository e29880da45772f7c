import sys

from ldadam.main import main

sys.exit(main())
