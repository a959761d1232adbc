import sys

from inobody.cli import main

sys.exit(main())
