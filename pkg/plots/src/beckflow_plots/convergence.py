"""Log-log convergence figure with slope annotations from a run's slopes table.

Usage: plot-convergence --run DIR [--run DIR ...] --out DIR [--dump]

Multiple run directories overlay into one figure.  The fitted orders are read
from the slopes.csv cells, never refitted here.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import style
from .records import RecordError, dump_cells, load_record

import matplotlib.pyplot as plt

MARKERS = "osd^v<>"


def build_figure(records, dump=False):
    fig, ax = plt.subplots()
    dumped = []
    for ri, rec in enumerate(records):
        table = rec.table("convergence")
        slopes = rec.table("slopes")
        orders = dict(zip(slopes.column("quantity"), slopes.column("order")))
        x_col = table.columns[0]
        xs = table.floats(x_col)
        for qi, quantity in enumerate(table.columns[1:]):
            ys = table.floats(quantity)
            order = float(orders[quantity]) if quantity in orders else None
            label = f"{rec.label}: {quantity}"
            if order is not None:
                label += f" (order {order:.2f})"
            ax.loglog(
                xs, ys, marker=MARKERS[(ri + qi) % len(MARKERS)], label=label
            )
        if dump:
            dumped.append(f"run {rec.path}")
            dumped.append(dump_cells(table, table.columns))
            dumped.append(dump_cells(slopes, slopes.columns))
        ax.set_xlabel(x_col)
    ax.set_ylabel("max-norm error")
    ax.set_title("refinement study")
    ax.legend(fontsize=7)
    return fig, "\n".join(dumped)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot-convergence", description=__doc__)
    parser.add_argument("--run", action="append", required=True,
                        help="run directory; repeat to overlay records")
    parser.add_argument("--out", required=True, help="figure output directory")
    parser.add_argument("--dump", action="store_true",
                        help="print the exact CSV cells used")
    args = parser.parse_args(argv)
    try:
        records = [load_record(r) for r in args.run]
        fig, dumped = build_figure(records, dump=args.dump)
    except RecordError as exc:
        print(f"plot-convergence: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    style.save(fig, out / "convergence.png")
    if args.dump:
        print(dumped)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
