import sys

from uqkit.cli import main

sys.exit(main())
