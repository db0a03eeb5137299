"""Shared figure style: fixed geometry and fonts, no timestamps, so figures
regenerate pixel-identically from the same run directory."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

FIGSIZE = (6.4, 4.2)
DPI = 125
PNG_METADATA = {"Software": "beckflow-plots"}

plt.rcParams.update(
    {
        "font.family": "DejaVu Sans",
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "figure.figsize": FIGSIZE,
        "savefig.dpi": DPI,
    }
)


def save(fig, path) -> None:
    fig.savefig(path, metadata=PNG_METADATA)
    plt.close(fig)
