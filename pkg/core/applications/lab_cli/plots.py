"""SVG line plots for sweep and audit reports.

Plots are written with a fixed hash salt and no date so reruns with the
same seed produce identical files.
"""

from pathlib import Path

import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from core.applications.functionals.profiles import SublevelProfile  # noqa: E402
from core.applications.lab_cli.interface import BoundsRow  # noqa: E402

SVG_HASH_SALT = "kahler-bounds-lab"
STYLE = {
    "svg.hashsalt": SVG_HASH_SALT,
    "svg.fonttype": "none",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_sweep(rows: list[BoundsRow], path: Path) -> Path:
    """sup|phi| and Ent_p against t, one marker per sampled state, t on a log axis."""
    with mpl.rc_context(STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.0, 5.0), sharex=True)
        t = np.array([row.t for row in rows])
        top.plot(t, [row.sup_abs_phi for row in rows], "o", markersize=3, label="sup|phi|")
        bounded = [row for row in rows if row.sup_bound is not None]
        if bounded:
            top.plot(
                [row.t for row in bounded],
                [row.sup_bound for row in bounded],
                "_",
                markersize=10,
                label="bound",
            )
            top.set_yscale("log")
        top.set_ylabel("sup|phi|")
        top.legend(loc="best")
        bottom.plot(t, [row.ent_p for row in rows], "s", markersize=3, color="tab:green")
        bottom.set_ylabel("Ent_p")
        bottom.set_xlabel("t")
        bottom.set_xscale("log")
        return _save(fig, path)


def plot_decay(profile: SublevelProfile, p: float, C_1: float, path: Path) -> Path:  # noqa: N803
    """phi(s) (log s)^p against log s with the decay constant as a horizontal line."""
    mask = profile.s_values > 1
    with mpl.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 3.5))
        log_s = np.log(profile.s_values[mask])
        ax.plot(log_s, profile.phi_of_s[mask] * log_s**p, "o-", markersize=3, label="phi(s) (log s)^p")
        ax.axhline(C_1, color="tab:red", linestyle="--", label="C_1")
        ax.set_xlabel("log s")
        ax.set_yscale("symlog", linthresh=1e-12)
        ax.legend(loc="best")
        return _save(fig, path)
