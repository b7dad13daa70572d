"""One command-line script per plot kind: CSV in, image out, optional title."""

import argparse
import sys
from typing import Optional, Sequence

from .render import render_distance, render_generator, render_trajectory
from .tables import SchemaError


def _main(render, kind: str, argv: Optional[Sequence[str]]) -> int:
    parser = argparse.ArgumentParser(
        prog=f"plotkit-{kind}",
        description=f"Render a {kind} CSV to an image file.",
    )
    parser.add_argument("csv", help="input CSV path")
    parser.add_argument("image", help="output image path (format from extension)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=100)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code is None else int(exc.code)
    try:
        render(args.csv, args.image, title=args.title, dpi=args.dpi)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def trajectory_main(argv: Optional[Sequence[str]] = None) -> int:
    return _main(render_trajectory, "trajectory", argv)


def distance_main(argv: Optional[Sequence[str]] = None) -> int:
    return _main(render_distance, "distance", argv)


def generator_main(argv: Optional[Sequence[str]] = None) -> int:
    return _main(render_generator, "generator", argv)
