"""CLI: `plot map <verify.csv> --out x.png` / `plot curve <results.csv> --out y.png`."""
from __future__ import annotations

import argparse
import sys

from .data import PlotDataError, read_map_csv, read_results_csv
from .render import render_map, render_success_curve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plot",
                                     description="Render sphere-colouring CSV exports")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="lon-lat point map coloured by p_i")
    p.add_argument("csv", help="per-point CSV written by the verifier")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--rotate-north", action="store_true",
                   help="rotate the coloured mass centroid to the north pole")

    p = sub.add_parser("curve", help="success probability versus theta")
    p.add_argument("csv", help="results CSV written by solve/sweep")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--relative", action="store_true",
                   help="plot P - P_hem instead of P")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "map":
            dataset = read_map_csv(args.csv)
            render_map(dataset, args.out, rotate_north=args.rotate_north)
        else:
            columns = read_results_csv(args.csv)
            render_success_curve(columns, args.out, relative=args.relative)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
