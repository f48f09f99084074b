"""Figure rendering for the CLI report path (headless matplotlib)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .experiments import CellResult  # noqa: E402


def save_speed_figure(
    scenario: str, results: list[CellResult], path: str | Path
) -> Path:
    """Replicate speeds per cell: one column per cell, mean marked."""
    path = Path(path)
    cells = [cr for cr in results if cr.evaluations]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, cr in enumerate(cells):
        speeds = cr.speeds
        ax.plot([i] * len(speeds), speeds, "o", color="tab:blue", alpha=0.55, ms=5)
        mean = sum(speeds) / len(speeds)
        ax.plot([i - 0.18, i + 0.18], [mean, mean], "-", color="tab:red", lw=2)
    ax.set_xticks(range(len(cells)))
    ax.set_xticklabels([cr.cell.name for cr in cells], rotation=12)
    ax.set_ylabel("speed (m/min)")
    ax.set_title(scenario)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_trajectory_figure(
    samples,
    control_points,
    path: str | Path,
    title: str = "foot path",
) -> Path:
    """Side view (forward vs height) of one leg's path with control points."""
    path = Path(path)
    ys = [row[3] for row in samples]
    zs = [row[4] for row in samples]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ys, zs, "-", color="tab:blue", lw=1.5, label="foot path")
    cy = [p.y for p in control_points]
    cz = [p.z for p in control_points]
    ax.plot(cy, cz, "o", color="tab:red", ms=7, label="control points")
    for i, (y, z) in enumerate(zip(cy, cz), start=1):
        ax.annotate(f"p{i}", (y, z), textcoords="offset points", xytext=(6, 6))
    ax.set_xlabel("forward (mm)")
    ax.set_ylabel("height (mm)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
