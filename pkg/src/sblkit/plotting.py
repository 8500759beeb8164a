"""Line charts of sweep results.

Figures are rendered through the object-oriented matplotlib API with a fixed
SVG hash salt and no timestamp, so the same rows always produce the same
bytes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
from matplotlib.figure import Figure  # noqa: E402

from .harness import NMSE_FLOOR_DB  # noqa: E402

NMSE_CEIL_DB = -NMSE_FLOOR_DB

SWEEP_LABELS = {
    "iid_gaussian": "sweep value",
    "ill_conditioned": r"condition number $\kappa$",
    "correlated": "correlation $c$",
    "nonzero_mean": r"mean $\mu$",
    "low_rank": "rank ratio $R/N$",
}

ALG_LABELS = {
    "amp": "AMP (BG prior)",
    "amp-sbl": "AMP-SBL",
    "utamp": "UTAMP (BG prior)",
    "utamp-sbl": "UTAMP-SBL",
    "oracle": "support oracle",
}

RC = {
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.5,
    "lines.markersize": 5,
    "legend.frameon": False,
    "svg.hashsalt": "sblkit",
    "svg.fonttype": "path",
}


@dataclass(frozen=True)
class PlotStyle:
    title: str | None = None
    xlabel: str | None = None
    ylabel: str = "NMSE (dB)"
    logx: bool | None = None
    width: float = 5.0
    height: float = 3.6


def _clip(value: float) -> tuple[float, bool]:
    if math.isnan(value):
        return value, False
    if value < NMSE_FLOOR_DB:
        return NMSE_FLOOR_DB, True
    if value > NMSE_CEIL_DB:
        return NMSE_CEIL_DB, True
    return value, False


def series(rows) -> dict[str, list[tuple[float, float]]]:
    """Group rows into ``alg -> [(sweep, clipped nmse)]`` sorted by sweep."""
    out: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        out.setdefault(row.algorithm, []).append((row.sweep_value, row.nmse_db))
    return {alg: sorted(pts) for alg, pts in out.items()}


def emit_plot(rows, path, style: PlotStyle | None = None) -> Path:
    """Write an SVG line chart and a companion ``.plot.csv`` with the plotted points.

    Values beyond +-320 dB (including the -inf exact-recovery sentinel) are
    clipped and flagged with a footnote.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to plot")
    families = {r.family for r in rows}
    if len(families) != 1:
        raise ValueError(f"rows mix families {sorted(families)}")
    family = families.pop()
    style = style or PlotStyle()
    path = Path(path)
    logx = style.logx
    if logx is None:
        logx = family == "ill_conditioned" and all(r.sweep_value > 0 for r in rows)

    plotted = {}
    clipped_any = False
    for alg, pts in series(rows).items():
        xs, ys = [], []
        for x, y in pts:
            yc, was_clipped = _clip(y)
            clipped_any |= was_clipped
            xs.append(x)
            ys.append(yc)
        plotted[alg] = (xs, ys)

    with matplotlib.rc_context(RC):
        fig = Figure(figsize=(style.width, style.height))
        ax = fig.add_subplot()
        for alg, (xs, ys) in plotted.items():
            ax.plot(xs, ys, marker="o", label=ALG_LABELS.get(alg, alg))
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(style.xlabel or SWEEP_LABELS[family])
        ax.set_ylabel(style.ylabel)
        if style.title:
            ax.set_title(style.title)
        ax.legend()
        if clipped_any:
            fig.text(0.01, 0.01, f"* values clipped to ±{NMSE_CEIL_DB:g} dB", fontsize=7, gid="clip-note")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "sblkit"})

    data_path = path.with_suffix(".plot.csv")
    with data_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alg", "sweep", "nmse_db_plotted"])
        for alg, (xs, ys) in plotted.items():
            for x, y in zip(xs, ys):
                w.writerow([alg, repr(x), repr(y)])
    return path
