"""Command-line entry point: ``plots render --kind ... --in ... --out ...``."""

import argparse
import sys

from .render import KINDS, FigureSpec, RenderError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render itstrack CSV tables into figures.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one CSV into one image")
    p_render.add_argument("--kind", required=True, choices=KINDS,
                          help="which CSV family the input is")
    p_render.add_argument("--in", dest="csv_path", required=True,
                          help="input CSV file")
    p_render.add_argument("--out", dest="image_path", required=True,
                          help="output image file")
    args = parser.parse_args(argv)

    try:
        render(FigureSpec(kind=args.kind, csv_path=args.csv_path,
                          image_path=args.image_path))
    except RenderError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
