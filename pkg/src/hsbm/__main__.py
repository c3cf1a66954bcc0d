import sys

from hsbm.cli import main

sys.exit(main())
