import sys

from rssimotion.cli import main

sys.exit(main())
