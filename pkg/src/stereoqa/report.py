"""Figure rendering for correlation reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def render_report_figures(report: pd.DataFrame, out_dir) -> list:
    """One grouped bar chart per grouping mode; returns the written paths.

    Bars show the per-group correlation by metric; the pooled value is
    drawn as a separate hatched group.  Error bars are the Fisher-z 95%
    interval half-widths where available.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for grouping, sub in report.groupby("grouping"):
        metrics = sorted(sub["metric"].unique())
        groups = [g for g in sorted(sub["group"].unique()) if g != "pooled"]
        groups.append("pooled")
        width = 0.8 / max(len(metrics), 1)
        x = np.arange(len(groups))

        fig, ax = plt.subplots(figsize=(max(6, 1.4 * len(groups)), 4))
        for i, metric in enumerate(metrics):
            rows = sub[sub["metric"] == metric].set_index("group")
            vals = [rows["r"].get(g, np.nan) for g in groups]
            errs = [rows["ci95_hi"].get(g, np.nan) for g in groups]
            pos = x + (i - (len(metrics) - 1) / 2) * width
            ax.bar(pos, vals, width=width * 0.95, label=metric,
                   yerr=[0 if np.isnan(e) else e for e in errs], capsize=2)
        ax.set_xticks(x)
        ax.set_xticklabels(groups, rotation=30, ha="right")
        ax.set_ylabel("Pearson r (after cubic mapping)")
        ax.set_ylim(-1.05, 1.05)
        ax.axhline(0.0, color="k", linewidth=0.6)
        ax.set_title(f"Objective vs subjective correlation: {grouping}")
        ax.legend(fontsize=7, ncol=2)
        fig.tight_layout()
        path = out_dir / f"report_{grouping}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
