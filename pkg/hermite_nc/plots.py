"""
plots.py
Static SVG plots of the curves an experiment collects (log-log decay and
convergence curves). Agg backend, fixed hash salt and no date metadata, so a
fixed seed gives identical files.
"""

from __future__ import annotations
import re
from pathlib import Path
from typing import Any, Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .util import ensure_dir, warn  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "hermite-nc"


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]+", "_", name).strip("_")


def plot_curve(name: str, curve: Dict[str, Any], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    x = curve["x"]
    for label in sorted(curve["series"]):
        y = curve["series"][label]
        ax.plot(x, y, marker="o", label=label)
    positive = all(v > 0 for v in x) and all(v > 0 for s in curve["series"].values() for v in s)
    if positive:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(curve.get("xlabel", ""))
    ax.set_ylabel(curve.get("ylabel", ""))
    ax.set_title(name)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_plots(curves: Dict[str, Dict[str, Any]], out_dir: Path) -> List[Path]:
    ensure_dir(out_dir)
    paths = []
    for name in sorted(curves):
        curve = curves[name]
        if not curve["x"] or not curve["series"]:
            warn(f"curve {name} is empty; no plot written")
            continue
        path = out_dir / f"plot_{_slug(name)}.svg"
        plot_curve(name, curve, path)
        paths.append(path)
    return paths
