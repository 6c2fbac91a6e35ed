#!/usr/bin/env python3
"""Start the decrypting viewer/relay.

Example:
    SECURECAM_KEY=000102030405060708090a0b0c0d0e0f \
        python scripts/run_relay.py --url http://127.0.0.1:8032/stream \
        --sink mjpeg --listen-port 8033
"""

import sys

from securecam.relay import main

if __name__ == "__main__":
    sys.exit(main())
