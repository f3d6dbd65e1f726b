"""Allows ``python -m iwasawa_ideals``."""
import sys

from iwasawa_ideals.main import main

if __name__ == "__main__":
    sys.exit(main())
