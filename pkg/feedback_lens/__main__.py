"""Run the command line with python -m feedback_lens."""

import sys

from .cli import main

sys.exit(main())
