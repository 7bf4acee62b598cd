import sys

from ripbound.cli import main

sys.exit(main())
