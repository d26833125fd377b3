"""Matplotlib renderings for benchmark and training reports.

Figures are written as PNG next to the delimited outputs; rendering is a
pure function of the report contents, so reruns produce byte-identical
files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .pipeline import (REFERENCE_CONFLICT_DECREASE_PCT, BenchReport)


def render_bench_figures(report: BenchReport, out_prefix: str) -> list[str]:
    """Scatter of paired conflict counts and a histogram of per-instance
    conflict reductions. Returns the written paths."""
    paths = []
    if not report.rows:
        return paths

    cd = np.array([r.conflicts_default for r in report.rows], dtype=float)
    ch = np.array([r.conflicts_hints for r in report.rows], dtype=float)

    fig, ax = plt.subplots(figsize=(5.0, 5.0), dpi=130)
    lo = max(0.5, min(cd.min(), ch.min(), 1.0) * 0.8)
    hi = max(cd.max(), ch.max(), 1.0) * 1.25
    ax.plot([lo, hi], [lo, hi], color="0.6", lw=1.0, ls="--", zorder=1)
    ax.scatter(np.maximum(cd, 0.5), np.maximum(ch, 0.5), s=14, alpha=0.7,
               color="tab:blue", zorder=2)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlim(lo, hi)
    ax.set_ylim(lo, hi)
    ax.set_xlabel("conflicts, default polarity")
    ax.set_ylabel("conflicts, hinted polarity")
    ax.set_title("paired conflicts (%s mode)" % report.mode)
    fig.tight_layout()
    path = out_prefix + "_conflicts.png"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    compared = report.compared
    fig, ax = plt.subplots(figsize=(5.6, 3.8), dpi=130)
    if compared:
        deltas = np.array([100.0 * (r.conflicts_default - r.conflicts_hints)
                           / r.conflicts_default for r in compared])
        ax.hist(deltas, bins=25, color="tab:blue", alpha=0.85)
        mean = float(deltas.mean())
        ax.axvline(mean, color="tab:red", lw=1.4,
                   label="measured mean %.1f%%" % mean)
    ax.axvline(REFERENCE_CONFLICT_DECREASE_PCT, color="0.3", lw=1.4, ls="--",
               label="reference %.0f%%" % REFERENCE_CONFLICT_DECREASE_PCT)
    ax.set_xlabel("conflict decrease per instance (%)")
    ax.set_ylabel("instances")
    ax.set_title("conflict reduction (%s mode)" % report.mode)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = out_prefix + "_delta_hist.png"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)
    return paths


def render_loss_curve(history: list[float], path: str) -> str:
    """Training loss over accepted gradient steps."""
    fig, ax = plt.subplots(figsize=(5.6, 3.8), dpi=130)
    ax.plot(np.arange(1, len(history) + 1), history, color="tab:blue", lw=1.2)
    ax.set_xlabel("accepted step")
    ax.set_ylabel("training loss")
    ax.set_title("logistic regression training")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
