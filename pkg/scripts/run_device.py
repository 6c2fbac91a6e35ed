#!/usr/bin/env python3
"""Start the device server.

Example:
    SECURECAM_KEY=000102030405060708090a0b0c0d0e0f \
        python scripts/run_device.py --port 8032 --fps 10 --framesize 5
"""

import sys

from securecam.server import main

if __name__ == "__main__":
    sys.exit(main())
