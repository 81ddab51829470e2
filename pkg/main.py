"""
Entry point for running randfa from a source checkout
"""

import sys

from randfa.cli import main

if __name__ == "__main__":
    sys.exit(main())
