import sys

from asoc.cli import main

sys.exit(main())
