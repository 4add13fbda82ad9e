import sys

from arcontext.cli import main

sys.exit(main())
