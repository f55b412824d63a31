#!/usr/bin/env python3
"""Run the bundled verification suite (flat and hyperbolic cases).

Thin driver over ``wittenlab run`` pointed at configs/theorem_suite.json.
Writes reports.jsonl, summary.csv and per-case mode profiles under
results/theorem-suite by default.
"""

import argparse
import sys
from pathlib import Path

from wittenlab import cli

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", default=str(ROOT / "results" / "theorem-suite"), help="output directory"
    )
    parser.add_argument("--jobs", type=int, default=4, help="parallel worker count")
    args = parser.parse_args()
    config = ROOT / "configs" / "theorem_suite.json"
    return cli.run(str(config), args.out, jobs=args.jobs, verbose=True)


if __name__ == "__main__":
    sys.exit(main())
