"""Run the qell command line."""
from .cli import main

raise SystemExit(main())
