"""Bar-chart rendering for frequency and comparison reports.

Matplotlib is imported lazily so the CLI stays fast when no figure is
requested. Charts are written straight to file (Agg backend); there is no
interactive display path.
"""

from pathlib import Path

from .report import ComparisonReport, FrequencyReport

DEFAULT_TOP = 25


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def render_report_figure(
    report: FrequencyReport, path: str | Path, top: int | None = DEFAULT_TOP
) -> None:
    """Horizontal bar chart of the most frequent concepts."""
    plt = _pyplot()
    rows = [r for r in report.rows if r.mention_count > 0]
    if top is not None:
        rows = rows[:top]
    rows = rows[::-1]  # largest bar on top
    labels = [r.preferred_label for r in rows]
    counts = [r.mention_count for r in rows]
    height = max(2.5, 0.32 * len(rows) + 1.2)
    fig, ax = plt.subplots(figsize=(9, height))
    ax.barh(range(len(rows)), counts, color="#4472a8")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.set_xlabel("mentions")
    ax.set_title(
        f"{report.corpus_name}: {report.total_mentions} mentions, "
        f"{report.terminology_name} ({report.concept_count} concepts)"
    )
    for i, count in enumerate(counts):
        ax.text(count, i, f" {count}", va="center", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_comparison_figure(
    comparison: ComparisonReport, path: str | Path, top: int | None = DEFAULT_TOP
) -> None:
    """Grouped bars for the concepts with the largest count differences."""
    plt = _pyplot()
    deltas = [d for d in comparison.deltas if d.left_count or d.right_count]
    if top is not None:
        deltas = deltas[:top]
    deltas = deltas[::-1]
    labels = [d.preferred_label for d in deltas]
    ys = range(len(deltas))
    height = max(2.5, 0.42 * len(deltas) + 1.2)
    fig, ax = plt.subplots(figsize=(9, height))
    bar_h = 0.38
    ax.barh(
        [y + bar_h / 2 for y in ys],
        [d.left_count for d in deltas],
        height=bar_h,
        label=f"{comparison.left.corpus_name} / {comparison.left.terminology_name}",
        color="#4472a8",
    )
    ax.barh(
        [y - bar_h / 2 for y in ys],
        [d.right_count for d in deltas],
        height=bar_h,
        label=f"{comparison.right.corpus_name} / {comparison.right.terminology_name}",
        color="#d98032",
    )
    ax.set_yticks(list(ys))
    ax.set_yticklabels(labels, fontsize=8)
    ax.set_xlabel("mentions")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
