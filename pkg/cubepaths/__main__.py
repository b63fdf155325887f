import sys

from cubepaths.main import main

sys.exit(main())
