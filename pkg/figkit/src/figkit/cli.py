"""Command line entry: figkit render --figure KIND --input CSV --output IMG."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, FigureSpec, render
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="figkit",
                                 description="Regenerate figures from simulation CSV files")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("--figure", required=True, choices=FIGURE_KINDS)
    p.add_argument("--input", required=True, help="source CSV")
    p.add_argument("--output", required=True, help="output image (png)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(FigureSpec(figure=args.figure, input=args.input,
                                output=args.output))
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
