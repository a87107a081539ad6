"""Command-line entry point for figure rendering."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import KINDS, FigureSpec, RenderError, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mvbandit-plot", description=__doc__)
    parser.add_argument("--csv", required=True, help="harness summary.csv")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--rho", type=float, help="rho filter (required for regret_vs_n)")
    parser.add_argument("--out", help="output image path (default: figure.png beside the CSV)")
    parser.add_argument("--policies", nargs="*", default=(), help="restrict to these policy labels")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--log-x", dest="log_x", action="store_true", default=None)
    group.add_argument("--no-log-x", dest="log_x", action="store_false")
    args = parser.parse_args(argv)

    out = Path(args.out) if args.out else Path(args.csv).parent / "figure.png"
    try:
        spec = FigureSpec(
            kind=args.kind,
            csv_path=Path(args.csv),
            out_path=out,
            rho=args.rho,
            policies=tuple(args.policies),
            log_x=args.log_x,
        )
        paths, labels = render(spec)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(f"wrote {p} ({', '.join(labels)})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
