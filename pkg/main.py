#!/usr/bin/env python3
"""
fovtopo - command-line entry point
"""

from fovtopo.main import main

if __name__ == "__main__":
    raise SystemExit(main())
