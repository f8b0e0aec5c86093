import sys

from pgtt.cli import main

sys.exit(main())
