import sys

from jsccbounds.cli import main

sys.exit(main())
