import sys

from qbslam.cli import main

sys.exit(main())
