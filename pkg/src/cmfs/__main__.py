import sys

from cmfs.cli import main

sys.exit(main())
