"""Batch plotting entry point: plot <kind> <inputs...> --out fig.png."""

from __future__ import annotations

import argparse
import sys

from .figures import plot_current, plot_scaling, plot_trajectory, plot_voltage
from .readers import SchemaError


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plot", description=__doc__)
    ap.add_argument("kind", choices=["trajectory", "current", "voltage", "scaling"])
    ap.add_argument("inputs", nargs="+", help="CSV/JSON files produced by the primary CLI")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--box", type=int, default=None, help="axis halfwidth for trajectory panels")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "trajectory":
            plot_trajectory(args.inputs, args.out, box=args.box)
        elif args.kind == "current":
            plot_current(args.inputs[0], args.out)
        elif args.kind == "voltage":
            plot_voltage(args.inputs[0], args.out)
        else:
            plot_scaling(args.inputs[0], args.out)
    except SchemaError as exc:
        sys.stderr.write(f"schema error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"missing input: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
