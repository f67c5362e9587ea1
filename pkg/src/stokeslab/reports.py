"""Report emission: delimited text files plus rendered figures.

Every report path writes a CSV with a one-line header; numeric cells use a
fixed repr so identical inputs give bitwise-identical files.  Each CSV is
accompanied by a PNG rendering of the same data for quick inspection.
"""

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def save_figure(path, series, xlabel="", ylabel="", title="",
                logx=False, logy=False):
    """Render line/marker series ([(label, x, y), ...]) to a PNG file."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, x, y in series:
        ax.plot(x, y, marker="o", markersize=3, linewidth=1, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1 or (series and series[0][0]):
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": "stokeslab"})
    plt.close(fig)
