"""Matplotlib rendering of simulation traces to figure files (SVG by default)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .sim import SimulationTrace  # noqa: E402

__all__ = ["save_trace_figures"]

MAX_POINTS = 2000


def _decimate(trace: SimulationTrace):
    stride = max(1, trace.times.size // MAX_POINTS)
    return slice(None, None, stride)


def save_trace_figures(trace: SimulationTrace, out_dir, stem: str = "trace",
                       fmt: str = "svg") -> list:
    """Render one figure per signal group; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sel = _decimate(trace)
    t = trace.times[sel]
    paths = []

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(t, trace.follower_states[sel], linewidth=0.8)
    ax.plot(t, trace.leader_states[sel], linewidth=1.2, linestyle="--", color="k")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("state")
    ax.set_title("follower states (solid) and leader states (dashed)")
    path = out_dir / f"{stem}_states.{fmt}"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(t, trace.performance_output[sel], linewidth=0.8)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("performance output")
    ax.set_title("graph-weighted output disagreement")
    path = out_dir / f"{stem}_performance.{fmt}"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)

    gap = np.linalg.norm(trace.tracked_trajectory - trace.hull_trajectory, axis=1)
    fig, ax = plt.subplots(figsize=(8, 5))
    positive = gap[sel] > 0
    if positive.any():
        ax.semilogy(t[positive], gap[sel][positive], linewidth=1.0)
    else:
        ax.plot(t, gap[sel], linewidth=1.0)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("hull error norm")
    ax.set_title("distance to the leaders' convex hull")
    path = out_dir / f"{stem}_hull_error.{fmt}"
    fig.savefig(path)
    plt.close(fig)
    paths.append(path)
    return paths
