# -*- coding: utf-8 -*-
"""Report figures."""
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_order_rmse(report, path, tolerance_db=0.5, title=None):
    """Bar chart of per-order RMS level ratios, saved to `path`."""
    orders = np.arange(len(report.ratio_db))
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.axhspan(-tolerance_db, tolerance_db, color="0.9", zorder=0)
    ax.axhline(0.0, color="0.5", lw=0.8, zorder=1)
    vals = np.where(np.isfinite(report.ratio_db), report.ratio_db, 0.0)
    ax.bar(orders, vals, width=0.6, color="#336699", zorder=2)
    for n, db in enumerate(report.ratio_db):
        if not np.isfinite(db):
            ax.text(n, 0.02, "n/a", ha="center", fontsize=8, color="0.4")
    ax.set_xlabel("SH order")
    ax.set_ylabel("RMS ratio out/in (dB)")
    ax.set_xticks(orders)
    lim = max(1.0, float(np.max(np.abs(vals))) * 1.3)
    ax.set_ylim(-lim, lim)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
