"""Figure rendering for the simulation report path.

Plots are written straight to files (Agg backend, no display) next to
the delimited orbit dump the CLI produces.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def render_orbit_figure(points: np.ndarray, dists: np.ndarray,
                        path: str, title: str = "") -> None:
    """Two-panel summary of a simulated orbit.

    Left: return distance to the starting point per iterate.  Right:
    the orbit projected to the first two torus coordinates (or the
    single coordinate against the step index when q = 1).
    """
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    steps = np.arange(1, len(dists) + 1)
    ax1.plot(steps, dists, lw=0.8)
    ax1.set_xlabel("iterate")
    ax1.set_ylabel("torus distance to start")
    ax1.set_yscale("symlog", linthresh=1e-12)
    ax1.set_title("return distance")
    if points.shape[1] >= 2:
        ax2.scatter(points[:, 0], points[:, 1], s=2, alpha=0.6)
        ax2.set_xlabel("coordinate 1")
        ax2.set_ylabel("coordinate 2")
    else:
        ax2.scatter(np.arange(len(points)), points[:, 0], s=2, alpha=0.6)
        ax2.set_xlabel("step")
        ax2.set_ylabel("coordinate 1")
    ax2.set_xlim(-0.02, 1.02) if points.shape[1] >= 2 else None
    ax2.set_ylim(-0.02, 1.02)
    ax2.set_title("orbit")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
