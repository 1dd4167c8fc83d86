import sys

from eigenspace.main import main

sys.exit(main())
