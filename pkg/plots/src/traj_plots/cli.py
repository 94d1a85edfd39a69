"""Command-line renderer: trajectory CSVs in, PNG panels out."""

from __future__ import annotations

import argparse
import sys
import warnings

from .errors import EmptyInput, SchemaMismatch
from .render import PANEL_CHOICES, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render trajectory CSVs into log-scale KKT violation "
                    "and consensus error panels.")
    parser.add_argument("--csv", nargs="+", required=True,
                        help="trajectory CSV path(s)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--panels", choices=PANEL_CHOICES, default="both",
                        help="which panel(s) to emit")
    parser.add_argument("--algorithms", nargs="+",
                        help="algorithms to plot (default: all present); "
                             "missing ones are skipped with a warning")
    parser.add_argument("--linear-y", action="store_true",
                        help="linear y-axis instead of the default log scale")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    labels = {a: a for a in args.algorithms} if args.algorithms else None
    spec = PlotSpec(csv_paths=args.csv, out_dir=args.out, panels=args.panels,
                    log_y=not args.linear_y, labels=labels)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = render(spec)
    except (SchemaMismatch, EmptyInput) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    for path in result.files:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
