import sys

from regionrag.cli import main

sys.exit(main())
