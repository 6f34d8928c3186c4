"""Run artifacts: delimited tables, JSON summaries, and rendered figures.

Every writer is deterministic — fixed column order, fixed float formatting,
no timestamps — so re-running a resolved scenario reproduces files byte for
byte.  Tables open with ``#``-prefixed comment lines echoing the resolved
parameters (the audit trail), then a header row naming the columns.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_FLOAT_FORMAT = "%.12g"


def format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FORMAT % float(value)
    return str(value)


def write_table(
    path: str | Path,
    columns: dict[str, object],
    comments: list[str] | None = None,
) -> Path:
    """Write named columns as CSV with leading ``#`` comment lines."""
    path = Path(path)
    names = list(columns.keys())
    series = [np.atleast_1d(np.asarray(columns[name])) for name in names]
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise ValueError(f"columns have mismatched lengths: {sorted(lengths)}")
    lines = [f"# {comment}" for comment in (comments or [])]
    lines.append(",".join(names))
    for row in zip(*series):
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_summary(path: str | Path, payload: dict) -> Path:
    """Write the structured run summary as stable, sorted JSON."""
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonify) + "\n")
    return path


def _jsonify(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def render_curves(
    path: str | Path,
    x,
    curves: dict[str, object],
    xlabel: str,
    ylabel: str,
    title: str,
) -> Path:
    """Render one or more labelled curves over a shared x-axis to a PNG."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, y in curves.items():
        ax.plot(np.asarray(x), np.asarray(y), label=label, linewidth=1.4)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(curves) > 1:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Date": None})
    plt.close(fig)
    return path


def render_surface(
    path: str | Path,
    t_values,
    n_values,
    matrix,
    zlabel: str,
    title: str,
) -> Path:
    """Render a value surface over (interval, count) as per-count curves."""
    path = Path(path)
    t_arr = np.asarray(t_values)
    grid = np.asarray(matrix)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for i, n in enumerate(n_values):
        row = grid[i]
        mask = np.isfinite(row)
        if mask.any():
            ax.plot(t_arr[mask], row[mask], label=f"N={int(n)}", linewidth=1.2)
    ax.set_xlabel("inspection interval T")
    ax.set_ylabel(zlabel)
    ax.set_title(title)
    ax.legend(fontsize=8, ncol=2)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Date": None})
    plt.close(fig)
    return path


def render_error_bars(
    path: str | Path,
    labels: list[str],
    means,
    errors,
    ylabel: str,
    title: str,
) -> Path:
    """Render point estimates with +/- 3 standard-error bars to a PNG."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    positions = np.arange(len(labels))
    ax.errorbar(
        positions,
        np.asarray(means),
        yerr=3.0 * np.asarray(errors),
        fmt="o",
        capsize=4.0,
    )
    ax.set_xticks(positions)
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Date": None})
    plt.close(fig)
    return path


def render_paths(
    path: str | Path,
    times,
    component_paths: dict[str, object],
    combined,
    title: str,
) -> Path:
    """Render sampled component trajectories and their combination."""
    path = Path(path)
    t_arr = np.asarray(times)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, traj in component_paths.items():
        ax.step(t_arr, np.asarray(traj), where="post", linewidth=1.0, label=label)
    ax.step(
        t_arr,
        np.asarray(combined),
        where="post",
        linewidth=1.8,
        color="black",
        label="combined",
    )
    ax.set_xlabel("time")
    ax.set_ylabel("degradation level")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Date": None})
    plt.close(fig)
    return path
