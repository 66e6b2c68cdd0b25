#!/usr/bin/env python3
"""Render a trajectory or periodic-solution CSV as a surface plot.

Companion viewer for the CSVs written by the ``seasonal-dispersal`` CLI
(headers ``t,x,u`` or ``t,x,ustar``). Requires matplotlib, which is not a
package dependency.

Usage:
    python scripts/plot_trajectory.py out/trajectory.csv [-o surface.png]
"""

import argparse
import csv
import sys

import numpy as np


def load_surface(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != 3 or header[0] != "t" or header[1] != "x":
            sys.exit(f"{path}: expected a t,x,<value> header, got {header}")
        data = np.array([[float(c) for c in row] for row in reader])
    if data.size == 0:
        sys.exit(f"{path}: no data rows")
    ts = np.unique(data[:, 0])
    xs = np.unique(data[:, 1])
    grid = data[:, 2].reshape(ts.size, xs.size)
    return ts, xs, grid, header[2]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv_path")
    ap.add_argument("-o", "--output", help="write PNG instead of showing a window")
    args = ap.parse_args()

    try:
        import matplotlib
        if args.output:
            matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        sys.exit("matplotlib is required: pip install matplotlib")

    ts, xs, grid, label = load_surface(args.csv_path)
    fig = plt.figure(figsize=(8, 5))
    ax = fig.add_subplot(projection="3d")
    T, X = np.meshgrid(ts, xs, indexing="ij")
    ax.plot_surface(T, X, grid, cmap="viridis", linewidth=0, antialiased=True)
    ax.set_xlabel("t")
    ax.set_ylabel("x")
    ax.set_zlabel(label)
    fig.tight_layout()
    if args.output:
        fig.savefig(args.output, dpi=150)
        print(f"wrote {args.output}")
    else:
        plt.show()


if __name__ == "__main__":
    main()
