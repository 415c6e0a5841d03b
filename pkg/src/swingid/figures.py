"""Render benchmark results as figures next to the data files.

Boxplots mirror the usual presentation: inertia parameters in red, damping
in blue, one box per parameter, y axis in percent relative error.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .bench import ScenarioResult, SweepTable

__all__ = ["boxplot_errors", "sweep_plot"]


def boxplot_errors(result: ScenarioResult, out_path: str | Path) -> Path:
    """One box per parameter of per-run relative errors (%)."""
    rows = result.error_rows()
    by_param: dict[str, list[float]] = {}
    for _scen, param, _run, err in rows:
        by_param.setdefault(param, []).append(err)
    params = sorted(by_param, key=lambda p: (p[0] != "M", p))
    data = [by_param[p] for p in params]

    fig, ax = plt.subplots(figsize=(max(4.0, 0.8 * len(params) + 1.5), 3.6))
    boxes = ax.boxplot(data, tick_labels=params, patch_artist=True, widths=0.55)
    for patch, param in zip(boxes["boxes"], params):
        patch.set_facecolor("#d62728" if param.startswith("M") else "#1f77b4")
        patch.set_alpha(0.6)
    ax.set_ylabel("relative error (%)")
    ax.set_title(result.scenario.name)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def sweep_plot(table: SweepTable, out_path: str | Path) -> Path:
    """Mean error vs observation window, one line per noise level."""
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    for j, level in enumerate(table.noise_levels):
        ax.plot(
            table.windows_s,
            table.mean_error_pct[:, j],
            marker="o",
            label=f"sigma = {100 * level:g}%",
        )
    ax.set_xlabel("observation window (s)")
    ax.set_ylabel(f"mean {table.parameter} error (%)")
    ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
