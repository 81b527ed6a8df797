"""plot-results command line entry point."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, EmptySelection, render
from .table import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot-results",
        description="Render execution-model comparison figures from edge-faas-sim CSV output.",
    )
    parser.add_argument("--csv", required=True, help="results.csv written by edge-faas-sim")
    parser.add_argument("--kind", required=True, choices=sorted(FIGURE_KINDS))
    parser.add_argument("--out", required=True, help="output image path (.svg/.pdf/.png)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.csv, args.kind, args.out)
    except (SchemaError, EmptySelection) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
