import sys

from riforest.cli import main

sys.exit(main())
