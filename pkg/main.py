"""
Entry point: ``python main.py <bench|verify|amdahl> [options]``.
"""

import sys

from pargrid.cli import main

if __name__ == "__main__":
    sys.exit(main())
