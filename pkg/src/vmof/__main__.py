import sys

from vmof.harness.cli import main

sys.exit(main())
