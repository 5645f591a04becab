import sys

from rsocc.cli import main

sys.exit(main())
