"""Command-line figure rendering for benchmark CSVs."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .render import PlotSpec, RenderError, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entrex-plot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("violins", help="per-group violin plot from a summary CSV")
    v.add_argument("--csv", required=True)
    v.add_argument("--out", required=True, help="output image path")
    v.add_argument("--threshold", default="iterations_to_99")
    v.add_argument(
        "--group-by",
        default="spec_group",
        help="comma-separated grouping columns (spec_group gives the six benchmark groups)",
    )
    v.add_argument("--data-out", help="also write the plot data layer as JSON")

    c = sub.add_parser("curves", help="entropy curves from a (p, spec, entropy) CSV")
    c.add_argument("--csv", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--data-out", help="also write the plot data layer as JSON")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "violins":
        spec = PlotSpec(
            kind="violins",
            csv_path=args.csv,
            out_path=args.out,
            group_by=tuple(args.group_by.split(",")),
            threshold_column=args.threshold,
        )
    else:
        spec = PlotSpec(kind="curves", csv_path=args.csv, out_path=args.out)
    try:
        layer = render(spec)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.data_out:
        Path(args.data_out).write_text(json.dumps(layer, indent=1, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
