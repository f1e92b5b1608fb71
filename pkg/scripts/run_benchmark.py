#!/usr/bin/env python3
"""Desk-scale benchmark sweep: er/bf/3bf families, small d, 10 seeds.

Completes in a few minutes on one core; set MAGLEARN_WORKERS to
parallelize across grid cells.
"""
import argparse
import sys

from maglearn import cli


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="bench_results")
    parser.add_argument("--families", default="er,bf,3bf")
    parser.add_argument("--d-list", default="4,5")
    parser.add_argument("--n-list", default="20,100,1000")
    parser.add_argument("--seeds", type=int, default=10)
    args = parser.parse_args()
    return cli.main(
        [
            "bench",
            "--families", args.families,
            "--d-list", args.d_list,
            "--n-list", args.n_list,
            "--seeds", str(args.seeds),
            "--ratio", "1",
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
