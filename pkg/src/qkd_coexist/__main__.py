import sys

from qkd_coexist.cli import main

sys.exit(main())
