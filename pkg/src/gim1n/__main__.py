import sys

from gim1n.cli import main

sys.exit(main())
