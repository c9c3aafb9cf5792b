"""figures <kind> --in CSV... --out PNG"""
from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures", description="Render cardiowave study CSVs to PNG")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--title")
    parser.add_argument("--xlabel")
    parser.add_argument("--ylabel")
    args = parser.parse_args(argv)
    spec = FigureSpec(kind=args.kind, inputs=args.inputs, output=args.out,
                      title=args.title, xlabel=args.xlabel, ylabel=args.ylabel)
    notes = render(spec)
    summary = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                        for k, v in sorted(notes.items()))
    print(f"wrote {args.out}" + (f" ({summary})" if summary else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
