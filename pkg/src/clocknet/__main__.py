import sys

from clocknet.cli import main

sys.exit(main())
