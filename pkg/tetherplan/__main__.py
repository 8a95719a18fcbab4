"""Allow ``python -m tetherplan``."""

from tetherplan.cli import main

raise SystemExit(main())
