#!/usr/bin/env python3
"""Sweep an instance grid and print a capacity/regime table as CSV.

Example:
    python3 scripts/rate_table.py --num-classes 2 3 --max-class-size 4
"""

import argparse
import csv
import itertools
import sys

from ppir.rates import rate_report


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--num-classes", type=int, nargs="+", default=[2, 3])
    parser.add_argument("--max-class-size", type=int, default=4)
    args = parser.parse_args()

    writer = csv.DictWriter(
        sys.stdout,
        fieldnames=[
            "class_sizes",
            "side_counts",
            "capacity",
            "ppir_rate",
            "pir_si_rate",
            "regimes",
        ],
        lineterminator="\n",
    )
    writer.writeheader()
    sizes = range(1, args.max_class_size + 1)
    for gamma in args.num_classes:
        pairs = [(mu, k) for mu in sizes for k in range(mu)]
        for combo in itertools.combinations_with_replacement(pairs, gamma):
            class_sizes = tuple(mu for mu, _ in combo)
            side_counts = tuple(k for _, k in combo)
            writer.writerow(rate_report(class_sizes, side_counts).csv_row())


if __name__ == "__main__":
    main()
