"""Report figures rendered next to the delimited output.

Everything draws to files through the Agg backend so runs work headless.
"""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGSIZE = (6.0, 4.0)
DPI = 150

_METRIC_LABELS = {
    "qoe": "QoE (utility + smoothness)",
    "playing_bitrate_mbps": "playing bitrate (Mbps)",
    "rebuffer_ratio": "rebuffering ratio",
}


def render_cdf_figure(rows, metric: str, path: str) -> str:
    """Empirical CDF of one metric, one line per algorithm."""
    by_algo: dict[str, list[float]] = {}
    for row in rows:
        by_algo.setdefault(row.algorithm, []).append(getattr(row, metric))
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for algo in sorted(by_algo):
        values = sorted(by_algo[algo])
        n = len(values)
        cdf = [(i + 1) / n for i in range(n)]
        ax.step(values, cdf, where="post", label=algo)
    ax.set_xlabel(_METRIC_LABELS.get(metric, metric))
    ax.set_ylabel("fraction of sessions")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def render_buffer_figure(series, path: str) -> str:
    """Decision-time buffer levels over the session, first trial only."""
    by_key: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for algo, trace_id, _chunk, t, q in series:
        by_key.setdefault((algo, trace_id), []).append((t, q))
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for (algo, trace_id) in sorted(by_key):
        points = sorted(by_key[(algo, trace_id)])
        ax.plot([p[0] for p in points], [p[1] for p in points],
                marker=".", markersize=3, linewidth=1,
                label=f"{algo} on {trace_id}")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("buffer level (segments)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def render_report_figures(result, out_dir: str) -> list[str]:
    """All report figures for one experiment run."""
    written = []
    for metric in ("qoe", "playing_bitrate_mbps", "rebuffer_ratio"):
        path = os.path.join(out_dir, f"cdf_{metric}.png")
        written.append(render_cdf_figure(result.rows, metric, path))
    if result.buffer_series:
        path = os.path.join(out_dir, "buffer_levels.png")
        written.append(render_buffer_figure(result.buffer_series, path))
    return written
