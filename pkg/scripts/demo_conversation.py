"""Replay a scripted conversation over a flow and print the exchange.

Usage: python3 scripts/demo_conversation.py [flow.json] [--seed N]
"""

import argparse
import sys
from pathlib import Path

from patter.engine import ChatEngine
from patter.validate import load_any

DEFAULT_FLOW = Path(__file__).resolve().parent.parent / "flows" / "movies.json"
DEFAULT_SCRIPT = [
    "hmm not sure",
    "I watch a movie most weekends",
    "star wars",
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("flow", nargs="?", default=str(DEFAULT_FLOW))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--script", nargs="*", default=DEFAULT_SCRIPT,
                        help="User lines to feed in order.")
    args = parser.parse_args(argv)

    engine = ChatEngine(load_any(args.flow), seed=args.seed)
    print(f"bot: {engine.start().text}")
    for line in args.script:
        if engine.ended:
            break
        print(f"you: {line}")
        report = engine.respond(line)
        print(f"bot: {report.text}    [{report.kind} -> {report.state}]")
    print(f"variables: {engine.variables()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
