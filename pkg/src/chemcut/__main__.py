import sys

from chemcut.cli import main

sys.exit(main())
