"""Render comparison reports as grouped-bar figures.

One bar pair (real vs simulated) per movement and bin, written to an image
file next to the delimited report exports.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .validation import ComparisonReport


def _row_label(row) -> str:
    return (
        f"{row.key.approach.letter}{row.key.turn.letter} "
        f"{row.key.vclass.value} b{row.bin_index}"
    )


def render_comparison_chart(
    reports: ComparisonReport | Sequence[ComparisonReport], out_path: str
) -> str:
    """Write the grouped real-vs-simulated bar chart; returns the path."""
    if isinstance(reports, ComparisonReport):
        reports = [reports]
    n_panels = max(1, len(reports))
    fig, axes = plt.subplots(
        n_panels, 1, figsize=(max(8.0, 0.45 * max((len(r.rows) for r in reports), default=1)), 4.0 * n_panels),
        squeeze=False,
    )
    for ax, report in zip(axes[:, 0], reports):
        labels = [_row_label(row) for row in report.rows]
        xs = range(len(report.rows))
        width = 0.38
        ax.bar([x - width / 2 for x in xs], [r.real for r in report.rows],
               width=width, label="real", color="#3465a4")
        ax.bar([x + width / 2 for x in xs], [r.simulated for r in report.rows],
               width=width, label="simulated", color="#f57900")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels, rotation=75, fontsize=7)
        ax.set_ylabel("vehicles")
        ax.set_title(
            f"intersection {report.intersection_id}: real vs simulated counts "
            f"(total {report.real_total} vs {report.simulated_total})"
        )
        ax.legend()
    if not reports:
        axes[0, 0].set_title("empty report")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path
