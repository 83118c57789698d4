import sys

from behavtune.cli import main

sys.exit(main())
