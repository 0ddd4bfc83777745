import sys

from sdfshrink.cli import main

sys.exit(main())
