import sys

from bwfusion.cli import main

sys.exit(main())
