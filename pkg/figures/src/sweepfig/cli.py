"""Command-line figure rendering from sweep CSVs."""

import argparse
import sys

from sweepfig.render import FigureSpec, RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sweepfig", description="render sweep CSVs into figures")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render one figure from CSV sweeps")
    r.add_argument("--csv", action="append", required=True,
                   help="input CSV (repeat to merge files into one figure)")
    r.add_argument("--x", default="sweep_value", help="x column")
    r.add_argument("--y", default="ader_mean", help="y column")
    r.add_argument("--group-by", default="algorithm", help="one curve per value")
    r.add_argument("--facet-by", default="experiment", help="one panel per value")
    r.add_argument("--logy", action="store_true", help="logarithmic error axis")
    r.add_argument("--x-label", default="")
    r.add_argument("--y-label", default="")
    r.add_argument("--title", default="")
    r.add_argument("--delta-f", type=float, default=15e3,
                   help="subcarrier spacing for the latency twin axis [Hz]")
    r.add_argument("--out", required=True, help="output image path (.png/.svg)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        csv_paths=args.csv,
        x=args.x,
        y=args.y,
        group_by=args.group_by,
        facet_by=args.facet_by,
        log_y=args.logy,
        x_label=args.x_label,
        y_label=args.y_label,
        title=args.title,
        delta_f_hz=args.delta_f,
    )
    try:
        info = render(spec, args.out)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(" ".join(info["paths"]))
    return 0


if __name__ == "__main__":
    sys.exit(main())
