"""Command-line entry: ``plot <kind> <csv...> -o out.png``.

Exit codes: 0 success, 1 schema mismatch (message names the column),
2 missing input file, 3 bad usage.
"""

from __future__ import annotations

import argparse
import os
import sys

from .figures import FIGURE_KINDS, SchemaError, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="render figures from simulator CSV outputs"
    )
    parser.add_argument("kind", choices=sorted(FIGURE_KINDS))
    parser.add_argument("csvs", nargs="+", help="input CSV file(s) for the figure kind")
    parser.add_argument("-o", "--out", required=True, help="output image path")
    args = parser.parse_args(argv)

    for path in args.csvs:
        if not os.path.exists(path):
            print(f"error: input not found: {path}", file=sys.stderr)
            return 2
    try:
        render(args.kind, args.csvs, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
