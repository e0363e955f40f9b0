"""Batch figure renderer for harness outputs.

    helmddm-plot --kind eigenvalues --in results/eigenvalues-w16.csv \
                 --out figs/eigenvalues.svg
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, PlotSpec, plot


def main(argv=None):
    ap = argparse.ArgumentParser(prog="helmddm-plot",
                                 description="render harness CSV/grid outputs")
    ap.add_argument("--kind", required=True, choices=KINDS)
    ap.add_argument("--in", dest="inputs", required=True, nargs="+",
                    help="input CSV/grid file(s)")
    ap.add_argument("--out", required=True,
                    help="output image path; extensionless writes .svg and .png")
    ap.add_argument("--title", default="")
    ap.add_argument("--cluster-radius", type=float, default=0.15)
    args = ap.parse_args(argv)
    spec = PlotSpec(kind=args.kind, inputs=args.inputs, output=args.out,
                    title=args.title, cluster_radius=args.cluster_radius)
    for path in plot(spec):
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
