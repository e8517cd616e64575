import sys

from delayflock.main import main

sys.exit(main())
