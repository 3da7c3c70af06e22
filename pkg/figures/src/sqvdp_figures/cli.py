"""`figures render --fig N --data <dir> --out <file>`.

Exit codes: 0 ok, 2 usage / missing input, 3 malformed artifact.  A
failed render writes no image file.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .artifacts import ArtifactError, MissingInputError
from .render import load_manifest, render

__all__ = ["main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("render", help="render one figure from a pipeline directory")
    p.add_argument("--fig", type=int, required=True, choices=range(1, 8))
    p.add_argument("--data", required=True, help="pipeline output directory (with manifest.json)")
    p.add_argument("--out", required=True, help="image file to write")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_manifest(args.data, args.fig)
        path = render(spec, args.out)
    except MissingInputError as exc:
        print(f"figures: missing input: {exc}", file=sys.stderr)
        return 2
    except ArtifactError as exc:
        print(f"figures: bad artifact: {exc}", file=sys.stderr)
        return 3
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
