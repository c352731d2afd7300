#!/usr/bin/env python3
"""Run the five-example solver comparison and write table1.csv."""

import sys

from nepsolve.cli import main

if __name__ == "__main__":
    sys.exit(main(["table1"] + sys.argv[1:]))
