"""Report figures, rendered with the Agg backend straight to files.

PNG metadata is stripped so identical inputs give byte-identical images.
"""

from __future__ import annotations

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

_RC = {"font.size": 9, "axes.spines.top": False, "axes.spines.right": False}


def _new(width=5.0, height=3.2):
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})


def plot_sweep(rows, path) -> None:
    """Precision, recall and F1 of C1 against the decision threshold."""
    with matplotlib.rc_context(_RC):
        fig = _new()
        ax = fig.add_subplot()
        taus = [tau for tau, _ in rows]
        ax.plot(taus, [m.precision for _, m in rows], "o-", label="precision")
        ax.plot(taus, [m.recall for _, m in rows], "s-", label="recall")
        ax.plot(taus, [m.f1 for _, m in rows], "^-", label="F1")
        ax.set_xlabel(r"threshold $\tau$")
        ax.set_ylabel("C1 metric")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(frameon=False, loc="lower left")
        _save(fig, path)


def plot_gating(plan, path, trace=None) -> None:
    """Captured frames over time, optionally above the probability trace."""
    with matplotlib.rc_context(_RC):
        fig = _new(6.0, 2.6 if trace is None else 3.6)
        axes = fig.subplots(2 if trace is not None else 1, 1, sharex=True, squeeze=False)[:, 0]
        if trace is not None:
            axes[0].step(trace.start_sec, trace.p, where="post", color="k", lw=1)
            axes[0].set_ylabel(r"$P(C_1)$")
            axes[0].set_ylim(0, 1)
        ax = axes[-1]
        spans = plan.captured_intervals()
        ax.broken_barh([(a, b - a) for a, b in spans], (0, 1), color="tab:green")
        ax.set_xlim(0, plan.timeline.duration_sec)
        ax.set_yticks([])
        ax.set_xlabel("time (s)")
        reduced = 100.0 * (1.0 - np.mean(plan.captured)) if plan.captured.size else 0.0
        ax.set_title(f"captured frames ({reduced:.2f}% reduced)", fontsize=9)
        _save(fig, path)


def plot_reports(names, reports, path) -> None:
    """Frames-reduced percentage per video."""
    with matplotlib.rc_context(_RC):
        fig = _new(max(3.0, 0.6 * len(names) + 2), 3.0)
        ax = fig.add_subplot()
        ax.bar(range(len(names)), [r.frames_reduced_pct for r in reports], color="tab:blue")
        ax.set_xticks(range(len(names)), names, rotation=30, ha="right")
        ax.set_ylabel("frames reduced (%)")
        ax.set_ylim(0, 100)
        _save(fig, path)


def plot_training(epoch_losses, path) -> None:
    with matplotlib.rc_context(_RC):
        fig = _new(4.5, 3.0)
        ax = fig.add_subplot()
        ax.plot(np.arange(1, len(epoch_losses) + 1), epoch_losses, "-", color="k")
        ax.set_xlabel("epoch")
        ax.set_ylabel("training loss")
        _save(fig, path)
