#!/usr/bin/env python3
"""
Main hicmapper Pipeline Runner

Runs any pipeline stage from a checkout without installing the package:

    python main.py pipeline data/pairs --seed 7 --out-dir results
    python main.py pipeline --distance-matrix data/synthetic_loop_200.csv --seed 7 --out-dir results

Every stage writes its result files plus manifest.json into --out-dir.
"""

import os
import sys

# Add the project root to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from hicmapper.cli import main


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n🛑  Interrupted by user – exiting cleanly.")
        sys.exit(130)
