#!/usr/bin/env python3
"""Solve one problem and emit the certificate report (assumption constants,
lemma-bound checks, stepsize monitor). Example:

    python scripts/run_diagnose.py --problem examp5 --x0 paper
"""

import sys

from nepsolve.cli import main

if __name__ == "__main__":
    sys.exit(main(["diagnose"] + sys.argv[1:]))
