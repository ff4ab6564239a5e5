"""The four figure kinds: trajectories, current heatmaps, voltage surfaces, scaling fits.

Pure consumers: no computation beyond affine scaling of the inputs. Figures
are deterministic for fixed inputs (Agg backend, fixed size and dpi).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402

from .readers import read_currents, read_field, read_scaling_report, read_trajectory  # noqa: E402

DPI = 100
FIGSIZE_SQUARE = (6.0, 6.0)


def _save(fig, out):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=DPI)
    plt.close(fig)


def plot_trajectory(paths, out, box: int | None = None) -> None:
    """Walk panels with time running up the vertical axis (3D: x, y, t)."""
    n = len(paths)
    fig = plt.figure(figsize=(6.0 * n, 6.0))
    for i, p in enumerate(paths):
        t, x, y = read_trajectory(p)
        ax = fig.add_subplot(1, n, i + 1, projection="3d")
        if len(t) == 1:
            ax.scatter(x, y, t, s=4, c="k")
        else:
            ax.plot(x, y, t, lw=0.5, c="tab:blue")
        if box is not None:
            ax.set_xlim(-box, box)
            ax.set_ylim(-box, box)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_zlabel("t")
        ax.set_title(Path(p).stem)
    _save(fig, out)


def plot_current(path, out) -> None:
    """Edge currents as segments with intensity increasing in |current|."""
    p1, p2, cur = read_currents(path)
    mag = np.abs(cur)
    top = mag.max()
    norm = mag / top if top > 0 else mag
    segs = np.stack([p1, p2], axis=1).astype(float)
    fig, ax = plt.subplots(figsize=FIGSIZE_SQUARE)
    lc = LineCollection(segs, cmap="inferno", array=norm, linewidths=0.5 + 2.5 * norm)
    ax.add_collection(lc)
    ax.autoscale()
    ax.set_aspect("equal")
    ax.set_title("current flow (max-normalized)")
    fig.colorbar(lc, ax=ax, shrink=0.8)
    _save(fig, out)


def plot_voltage(path, out) -> None:
    """Voltage profile as a 3D surface over the box."""
    _, _, _, xs, ys, grid = read_field(path)
    fig = plt.figure(figsize=FIGSIZE_SQUARE)
    ax = fig.add_subplot(projection="3d")
    mx, my = np.meshgrid(xs, ys)
    ax.plot_surface(mx, my, grid, cmap="viridis", linewidth=0, antialiased=False)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("voltage")
    _save(fig, out)


def plot_scaling(path, out) -> None:
    """Median log value vs log side with the quartile band and fitted slope.

    The reference line with the report's psi exponent is overlaid when present.
    """
    rep = read_scaling_report(path)
    sizes = np.array(sorted(int(n) for n in rep["per_size"]))
    xs = np.log(2.0 * sizes + 1.0)
    med = np.array([rep["per_size"][str(n)]["median_log"] for n in sizes])
    q25 = np.array([rep["per_size"][str(n)]["q25_log"] for n in sizes])
    q75 = np.array([rep["per_size"][str(n)]["q75_log"] for n in sizes])
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    ax.fill_between(xs, q25, q75, alpha=0.25, label="interquartile")
    ax.plot(xs, med, "o-", label="median")
    slope = rep["slope"]
    anchor = med[0]
    ax.plot(xs, anchor + slope * (xs - xs[0]), "--", label=f"fit slope {slope:.2f}")
    psi = rep.get("psi_reference")
    if psi is not None:
        ax.plot(xs, anchor + psi * (xs - xs[0]), ":", label=f"psi reference {psi:.2f}")
    ax.set_xlabel("log side")
    ax.set_ylabel(f"log {rep['quantity']}")
    ax.set_title(f"{rep['quantity']}  gamma={rep['gamma']:.4g}")
    ax.legend()
    _save(fig, out)
    return slope
