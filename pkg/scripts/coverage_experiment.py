"""Measure how many seeded draws a template needs to cover its productions.

For each template, draws responses with seeds 0..N and reports when every
enumerable production has been seen at least once.

Usage: python3 scripts/coverage_experiment.py [--draws N]
"""

import argparse
import random
import sys

from patter.generation import generate, productions
from patter.natex import parse

TEMPLATES = [
    "I watched lots of $GENRE={action, horror, drama} movies {recently, lately}",
    "{hello, hi, hey} there, {how are you, what's new}?",
    "$PET={dog, cat, hamster} owners are {kind, patient, busy} people",
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--draws", type=int, default=1000)
    args = parser.parse_args(argv)

    for source in TEMPLATES:
        ast = parse(source)
        universe = productions(ast, {})
        seen = set()
        covered_at = None
        for seed in range(args.draws):
            seen.add(generate(ast, {}, None, random.Random(seed)).text)
            if covered_at is None and seen == universe:
                covered_at = seed + 1
        print(f"{source}")
        print(f"  productions: {len(universe)}  seen: {len(seen)}  "
              f"full coverage after: {covered_at or 'not reached'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
