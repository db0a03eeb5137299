"""Flow-run figures: density snapshots along the path, the transport velocity
(line plots in 1d, a quiver in 2d), and the per-time transport-error curve.

Usage: plot-flow --run DIR --out DIR [--dump]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import style
from .records import RecordError, dump_cells, load_record

import matplotlib.pyplot as plt


def _snapshot_groups(table):
    ts = table.floats("t")
    order = sorted(set(ts))
    groups = {t: [i for i, v in enumerate(ts) if v == t] for t in order}
    return order, groups


def density_figure_1d(table):
    ts, groups = _snapshot_groups(table)
    xs = table.floats("x")
    rho = table.floats("rho")
    fig, ax = plt.subplots()
    for t in ts:
        idx = groups[t]
        ax.plot([xs[i] for i in idx], [rho[i] for i in idx], label=f"t = {t:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title("path snapshots")
    ax.legend(fontsize=7)
    return fig


def velocity_figure_1d(table):
    ts, groups = _snapshot_groups(table)
    xs = table.floats("x")
    xi = table.floats("xi_x")
    fig, ax = plt.subplots()
    for t in ts:
        idx = groups[t]
        ax.plot([xs[i] for i in idx], [xi[i] for i in idx], label=f"t = {t:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("transport velocity")
    ax.set_title("velocity slices")
    ax.legend(fontsize=7)
    return fig


def density_figure_2d(table):
    ts, groups = _snapshot_groups(table)
    xs, ys = np.array(table.floats("x")), np.array(table.floats("y"))
    rho = np.array(table.floats("rho"))
    fig, axes = plt.subplots(1, len(ts), figsize=(2.2 * len(ts), 2.6),
                             sharey=True)
    for ax, t in zip(np.atleast_1d(axes), ts):
        idx = groups[t]
        n = int(round(np.sqrt(len(idx))))
        field = rho[idx].reshape(n, n)
        ax.imshow(field.T, origin="lower", extent=(0, 1, 0, 1), cmap="viridis")
        ax.set_title(f"t = {t:g}", fontsize=8)
        ax.set_xticks([0, 1])
        ax.set_yticks([0, 1])
        ax.grid(False)
    return fig


def quiver_figure_2d(table, t_mid):
    ts, groups = _snapshot_groups(table)
    t = min(ts, key=lambda v: abs(v - t_mid))
    idx = groups[t]
    xs = np.array(table.floats("x"))[idx]
    ys = np.array(table.floats("y"))[idx]
    u = np.array(table.floats("xi_x"))[idx]
    v = np.array(table.floats("xi_y"))[idx]
    n = int(round(np.sqrt(len(idx))))
    stride = max(1, n // 16)
    keep = [
        i
        for i in range(len(idx))
        if (i // n) % stride == 0 and (i % n) % stride == 0
    ]
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    ax.quiver(xs[keep], ys[keep], u[keep], v[keep], angles="xy")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title(f"transport field at t = {t:g}")
    ax.grid(False)
    return fig


def error_figure(metrics):
    ts = metrics.floats("t")
    l1 = metrics.floats("l1")
    defect = metrics.floats("mass_defect")
    fig, ax = plt.subplots()
    ax.semilogy(ts, l1, marker="o", label="L1 distance to path density")
    ax.semilogy(ts, defect, marker="s", label="pre-normalization mass defect")
    ax.set_xlabel("t")
    ax.set_title("transport diagnostics")
    ax.legend(fontsize=7)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot-flow", description=__doc__)
    parser.add_argument("--run", required=True, help="flow run directory")
    parser.add_argument("--out", required=True, help="figure output directory")
    parser.add_argument("--dump", action="store_true",
                        help="print the exact CSV cells used")
    args = parser.parse_args(argv)
    try:
        rec = load_record(args.run)
        snaps = rec.table("flow_snapshots")
        metrics = rec.table("flow_metrics")
        two_d = "y" in snaps.columns
        figures = {}
        if two_d:
            figures["flow_density.png"] = density_figure_2d(snaps)
            figures["flow_quiver.png"] = quiver_figure_2d(snaps, 0.5)
        else:
            figures["flow_density.png"] = density_figure_1d(snaps)
            figures["flow_velocity.png"] = velocity_figure_1d(snaps)
        figures["flow_error.png"] = error_figure(metrics)
    except RecordError as exc:
        print(f"plot-flow: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, fig in figures.items():
        style.save(fig, out / name)
    if args.dump:
        used = ["t", "x", "rho"] + (["y", "xi_x", "xi_y"] if two_d else ["xi_x"])
        print(dump_cells(snaps, used))
        print(dump_cells(metrics, ["t", "l1", "mass_defect"]))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
