"""Figure rendering for benchmark reports and loss traces.

Figures are written next to the delimited output files by the CLI; all
rendering uses the Agg backend so it works headless.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_bench_figure(report, path: str) -> None:
    """Grid-search surface and per-run test AUCs for one benchmark report."""
    cells = report.cells if hasattr(report, "cells") else report["cells"]
    per_fold = report.per_fold if hasattr(report, "per_fold") else report["per_fold"]
    mean = report.mean if hasattr(report, "mean") else report["mean"]
    std = report.std if hasattr(report, "std") else report["std"]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))

    lams = sorted({c["lambda"] for c in cells})
    for lam in lams:
        pts = sorted((c["eta"], c["inner_auc"]) for c in cells if c["lambda"] == lam)
        xs = [math.log2(e) for e, _ in pts]
        ax1.plot(xs, [a for _, a in pts], lw=1, label=f"$\\lambda=2^{{{math.log2(lam):.0f}}}$")
    ax1.set_xlabel("log2 stepsize")
    ax1.set_ylabel("inner CV AUC")
    ax1.set_title("grid surface")
    if len(lams) <= 6:
        ax1.legend(fontsize=7)

    aucs = [row["auc"] for row in per_fold]
    ax2.plot(range(1, len(aucs) + 1), aucs, "o", ms=4)
    ax2.axhline(mean, color="k", lw=1)
    ax2.axhspan(mean - std, mean + std, color="k", alpha=0.15)
    ax2.set_xlabel("outer run")
    ax2.set_ylabel("test AUC")
    ax2.set_title(f"mean {mean:.4f} $\\pm$ {std:.4f}")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trace_figure(steps, cum_loss, path: str) -> None:
    """Average per-step loss against stream position, log-log."""
    steps = np.asarray(steps, dtype=float)
    avg = np.asarray(cum_loss, dtype=float) / steps
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(steps, avg, "o-", ms=4)
    ax.set_xlabel("instances seen")
    ax.set_ylabel("average per-step loss")
    ax.set_title("loss trace")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
