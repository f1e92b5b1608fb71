#!/usr/bin/env python3
"""Graduate-admissions confounding demo.

Generates the scenario (department and ability hidden, gender-admit
direct edges forbidden), learns a maximal ancestral graph, and reports
whether the gender <-> admit confounding edge was recovered.
"""
import argparse
import sys

from maglearn import cli


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="demo_results")
    args = parser.parse_args()
    return cli.main(["demo", "--n", str(args.n), "--seed", str(args.seed), "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
