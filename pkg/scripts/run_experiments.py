"""Run every experiment scenario with default settings and write the tables."""

import argparse
import sys
from pathlib import Path

from magclimb.cli import main as cli_main
from magclimb.experiments import Scenario


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args()

    worst = 0
    for scenario in Scenario:
        code = cli_main(["experiment", scenario.value, "--out", str(args.out)])
        print(f"{scenario.value:<10} exit={code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
