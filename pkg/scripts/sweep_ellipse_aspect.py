#!/usr/bin/env python3
"""Sweep ellipse aspect ratio against weight slope.

Drives ``wittenlab sweep`` with configs/ellipse_aspect_sweep.json: a 5x2
grid of centred ellipses (aspect 1..2) under linear weights of slope 0
and 0.4.  The interesting output is sweep_summary.json: the minimal
conjecture margin should sit at aspect 1, the round case.
"""

import argparse
import sys
from pathlib import Path

from wittenlab import cli

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", default=str(ROOT / "results" / "ellipse-aspect"), help="output directory"
    )
    parser.add_argument("--jobs", type=int, default=4, help="parallel worker count")
    args = parser.parse_args()
    config = ROOT / "configs" / "ellipse_aspect_sweep.json"
    return cli.sweep(str(config), args.out, jobs=args.jobs, verbose=True)


if __name__ == "__main__":
    sys.exit(main())
