import sys

from selbias.runner import main

sys.exit(main())
