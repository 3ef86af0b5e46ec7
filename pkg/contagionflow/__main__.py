from __future__ import annotations

import sys

from contagionflow.cli import main

sys.exit(main())
