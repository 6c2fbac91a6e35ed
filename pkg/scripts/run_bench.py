#!/usr/bin/env python3
"""Run the benchmark suites.

Examples:
    python scripts/run_bench.py --suite micro --json micro.json
    python scripts/run_bench.py --suite e2e --duration 10 --fps 10
"""

import sys

from securecam.bench import main

if __name__ == "__main__":
    sys.exit(main())
