"""Allow ``python3 -m cochord``."""
import sys

from .cli import main

sys.exit(main())
