"""Figure rendering for experiment results.

Reads the delimited outputs written by the harness and renders matplotlib
figures next to them. Kept separate from the run path, which emits data
only.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import numpy as np

from .sim import Scenario


def read_summary(path) -> dict:
    """Load a summary or run CSV into a dict of float arrays."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"no rows in {path}")
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def _result_label(result_dir: Path) -> str:
    config = result_dir / "config.json"
    if config.is_file():
        with open(config) as fh:
            return json.load(fh).get("filter", result_dir.name)
    return result_dir.name


def plot_ospa_medians(result_dirs, out_path):
    """Stacked total/localization/cardinality miss-distance panels."""
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 7.5), sharex=True)
    panels = [("ospa_total", "total [m]"), ("ospa_loc", "localization [m]"),
              ("ospa_card", "cardinality [m]")]
    for result_dir in map(Path, result_dirs):
        data = read_summary(result_dir / "summary.csv")
        label = _result_label(result_dir)
        for ax, (column, _) in zip(axes, panels):
            ax.plot(data["step"], data[column], label=label)
    for ax, (_, ylabel) in zip(axes, panels):
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
    axes[0].set_title("median miss distance over time")
    axes[0].legend(loc="upper right")
    axes[-1].set_xlabel("step")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def plot_cardinality(result_dirs, out_path):
    """Median estimated vs true target count over time."""
    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    truth_drawn = False
    for result_dir in map(Path, result_dirs):
        data = read_summary(result_dir / "summary.csv")
        if not truth_drawn:
            ax.step(data["step"], data["true_cardinality"], "k--", where="post",
                    label="true")
            truth_drawn = True
        ax.plot(data["step"], data["est_cardinality"], label=_result_label(result_dir))
    ax.set_xlabel("step")
    ax.set_ylabel("target count")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def plot_scenario(scenario: Scenario, out_path):
    """Target trajectories and sensor positions in the plane."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    T = scenario.motion.T
    for i, target in enumerate(scenario.targets):
        ages = np.arange(target.death - target.birth) * T
        x = target.state[0] + target.state[1] * ages
        y = target.state[2] + target.state[3] * ages
        ax.plot(x, y, label=f"target {i}")
        ax.plot(x[0], y[0], "o", color=ax.lines[-1].get_color())
    for i, sensor in enumerate(scenario.sensors):
        ax.plot(sensor[0], sensor[1], "k^", markersize=9)
        ax.annotate(str(i), sensor, textcoords="offset points", xytext=(6, 6))
    aoi = scenario.aoi
    ax.set_xlim(aoi.xmin, aoi.xmax)
    ax.set_ylim(aoi.ymin, aoi.ymax)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def render_report(result_dirs, out_dir) -> list:
    """Render all figures for one or more result directories."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        plot_ospa_medians(result_dirs, out / "ospa_median.png"),
        plot_cardinality(result_dirs, out / "cardinality_median.png"),
    ]
    config = Path(result_dirs[0]) / "config.json"
    if config.is_file():
        with open(config) as fh:
            scenario = Scenario.from_dict(json.load(fh)["scenario"])
        written.append(plot_scenario(scenario, out / "scenario_laydown.png"))
    return written
