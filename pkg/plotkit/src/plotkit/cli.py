"""Command-line entry point mirroring FigureSpec."""

import argparse
import sys

from .render import FigureSpec, SchemaError, dump, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render sweep CSV tables into figures.",
    )
    parser.add_argument("--input", required=True, help="sweep CSV path")
    parser.add_argument("--figure", required=True,
                        choices=["fig2_row", "fig3_traverse"])
    parser.add_argument("--quantity", required=True,
                        help="column to plot (e.g. fidelity, O_z)")
    parser.add_argument("--output", required=True, help="PNG/SVG path")
    parser.add_argument("--title", default="")
    parser.add_argument("--dpi", type=int, default=150)
    parser.add_argument("--dump", default=None,
                        help="also write the plotted series as CSV")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        input_csv=args.input,
        figure=args.figure,
        quantity=args.quantity,
        output=args.output,
        title=args.title,
        dpi=args.dpi,
    )
    try:
        render(spec)
        if args.dump:
            dump(spec, args.dump)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
