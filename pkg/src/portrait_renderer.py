#!/usr/bin/env python3
"""
Portrait Renderer Module
Deterministic SVG phase portraits: orbits, equilibria and definite-direction rays
"""

import cmath
from pathlib import Path
from typing import Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Circle

from .analysis_report import AnalysisReport
from .equilibrium_classifier import TimeDirection
from .flow_integrator import Orbit

MAX_POLYLINE_POINTS = 2000
RAY_FRACTION = 0.1
ARROW_FRACTIONS = (1 / 3, 2 / 3)
SVG_SETTINGS = {"svg.hashsalt": "holoflow", "svg.fonttype": "path"}


def decimate(points: np.ndarray, limit: int = MAX_POLYLINE_POINTS) -> np.ndarray:
    """Evenly spaced subset of at most `limit` samples, keeping both ends"""
    points = np.asarray(points, dtype=complex)
    if len(points) <= limit:
        return points
    indices = np.unique(np.linspace(0, len(points) - 1, limit).round().astype(int))
    return points[indices]


def _arrow_segments(points: np.ndarray):
    """Segments at fixed fractions of arc length"""
    if len(points) < 2:
        return []
    arc = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(points)))])
    if arc[-1] == 0:
        return []
    segments = []
    for fraction in ARROW_FRACTIONS:
        k = int(np.searchsorted(arc, fraction * arc[-1]))
        k = min(max(k, 1), len(points) - 1)
        segments.append((points[k - 1], points[k]))
    return segments


def build_portrait(report: AnalysisReport, orbits: Sequence[Orbit]) -> Figure:
    """
    Draw a phase portrait

    Args:
        report: Completed analysis report
        orbits: Orbit halves to draw

    Returns:
        Matplotlib figure (caller closes it)
    """
    lo = complex(*report.region["lo"])
    hi = complex(*report.region["hi"])
    diagonal = abs(hi - lo)

    fig, ax = plt.subplots(figsize=(6, 6))
    ax.set_xlim(lo.real, hi.real)
    ax.set_ylim(lo.imag, hi.imag)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(f"z' = {report.function}")

    for orbit in orbits:
        points = decimate(orbit.points)
        ax.plot(points.real, points.imag, color="tab:blue", linewidth=0.7)
        for start, end in _arrow_segments(points):
            # Backward samples run against the flow
            if orbit.direction is TimeDirection.Backward:
                start, end = end, start
            ax.annotate("", xy=(end.real, end.imag), xytext=(start.real, start.imag),
                        arrowprops={"arrowstyle": "->", "color": "tab:blue", "linewidth": 0.7})

    for k, eq in enumerate(report.equilibria):
        location = complex(*eq["location"])
        for j, direction in enumerate(eq["directions"]):
            end = location + RAY_FRACTION * diagonal * cmath.exp(1j * direction["theta"])
            color = "tab:green" if direction["time_sign"] == TimeDirection.Forward.value else "tab:red"
            (ray,) = ax.plot([location.real, end.real], [location.imag, end.imag],
                             color=color, linewidth=1.2)
            ray.set_gid(f"direction-ray-{k}-{j}")
        marker = Circle((location.real, location.imag), radius=0.004 * diagonal * (1 + eq["order"]),
                        color="black", zorder=5)
        marker.set_gid(f"equilibrium-{k}")
        ax.add_patch(marker)

    return fig


def render_svg(report: AnalysisReport, orbits: Sequence[Orbit], path: Path) -> None:
    """Write the portrait as SVG (byte-stable for identical input)"""
    fig = build_portrait(report, orbits)
    try:
        with plt.rc_context(SVG_SETTINGS):
            fig.savefig(Path(path), format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
