"""Report figures: ROC curves and predicted-vs-actual accuracy.

Rendered headlessly to PNG files next to the report. Output bytes are
deterministic for a fixed matplotlib version: the Agg backend is forced
and the Software metadata tag is stripped.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluation import EvalReport, roc_curve

_DPI = 100
_PNG_META = {"Software": None}


def render_roc_figure(report: EvalReport, path: str | Path) -> Path:
    """One ROC curve per dataset that has both label classes."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.plot([0.0, 1.0], [0.0, 1.0], linestyle="--", color="0.6", linewidth=1.0)
    for d in report.datasets:
        if d.roc_auc is None or d.probabilities is None or d.labels is None:
            continue
        points = roc_curve(d.probabilities, d.labels)
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.plot(xs, ys, label=f"{d.name} ({d.role}, AUC={d.roc_auc:.3f})")
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("Recall")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Correctness-ranking ROC curves")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=_DPI, metadata=_PNG_META)
    plt.close(fig)
    return path


def render_accuracy_figure(report: EvalReport, path: str | Path) -> Path:
    """Predicted vs. actual dataset accuracy, with the y=x reference and
    the no-performance-drop baseline level."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.plot([0.0, 1.0], [0.0, 1.0], linestyle="--", color="0.6", linewidth=1.0,
            label="perfect prediction")
    ax.axhline(report.in_domain_accuracy, linestyle=":", color="0.4", linewidth=1.0,
               label="no-performance-drop baseline")
    markers = {"in-domain": "o", "out-of-domain": "s"}
    for d in report.datasets:
        ax.scatter(d.actual_accuracy, d.predicted_accuracy,
                   marker=markers.get(d.role, "o"), zorder=3)
        ax.annotate(d.name, (d.actual_accuracy, d.predicted_accuracy),
                    textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_xlabel("Actual accuracy")
    ax.set_ylabel("Predicted accuracy")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.0)
    ax.set_title("Dataset accuracy prediction")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=_DPI, metadata=_PNG_META)
    plt.close(fig)
    return path


def render_report_figures(report: EvalReport, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return [render_roc_figure(report, directory / "roc_curves.png"),
            render_accuracy_figure(report, directory / "accuracy.png")]
