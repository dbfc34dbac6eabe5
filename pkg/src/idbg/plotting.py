"""Figure rendering for reports. matplotlib is imported lazily, Agg backend."""

from __future__ import annotations

from pathlib import Path

from .statistics import StatisticState, format_value

RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.bbox": "tight",
    "savefig.dpi": 120,
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_statistics(states: list[StatisticState], path) -> Path:
    """Horizontal bar chart of statistic values, labelled with their units."""
    plt = _pyplot()
    path = Path(path)
    with plt.rc_context(RC):
        height = max(1.5, 0.45 * len(states) + 0.8)
        fig, ax = plt.subplots(figsize=(6.4, height))
        if states:
            labels = [st.descriptor.id for st in states]
            values = [st.value for st in states]
            y = list(range(len(states)))
            ax.barh(y, values, color="#4c72b0")
            ax.set_yticks(y)
            ax.set_yticklabels(labels)
            ax.invert_yaxis()
            for yi, st in zip(y, states):
                ax.annotate(
                    f" {format_value(st.value)} {st.descriptor.unit}",
                    xy=(st.value, yi),
                    va="center",
                    fontsize=8,
                )
            ax.axvline(0, color="0.3", linewidth=0.8)
        else:
            ax.text(0.5, 0.5, "no statistics", ha="center", va="center", transform=ax.transAxes)
            ax.set_yticks([])
        ax.set_xlabel("value (display units)")
        ax.set_title("Statistics")
        fig.savefig(path)
        plt.close(fig)
    return path
