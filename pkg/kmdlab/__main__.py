"""Allow ``python -m kmdlab``."""
from kmdlab.cli import main

raise SystemExit(main())
