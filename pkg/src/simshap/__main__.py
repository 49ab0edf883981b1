import sys

from simshap.cli import main

sys.exit(main())
