import sys

from marriage_hact.cli import main

sys.exit(main())
