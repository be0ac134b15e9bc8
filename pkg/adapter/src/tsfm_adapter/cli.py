"""Adapter command line.

    tsfm-adapter serve --model gbdt [--port N] [--seed N]
"""

from __future__ import annotations

import argparse
import sys

from .errors import ModelUnavailable
from .protocol import serve_stdio, serve_tcp
from .registry import MODELS, load_model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsfm-adapter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="answer protocol requests for one model")
    serve.add_argument("--model", required=True, choices=sorted(MODELS))
    serve.add_argument("--port", type=int, default=None, help="TCP instead of stdio")
    serve.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        entry, model = load_model(args.model, seed=args.seed)
    except ModelUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.port is not None:
        serve_tcp(entry, model, args.seed, args.port)
    else:
        serve_stdio(entry, model, args.seed)
    return 0


if __name__ == "__main__":
    sys.exit(main())
