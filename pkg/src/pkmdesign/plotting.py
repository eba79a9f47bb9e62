"""Figures for workspace maps and synthesis results, rendered to files."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .workspace import dextrous_region  # noqa: E402

FIGSIZE = (5.0, 4.2)


def _section(grid, values):
    """2-D slice through the grid: the middle sample of every axis past the second."""
    shape = grid.region.shape
    arr = np.asarray(values).reshape(shape)
    index = tuple(slice(None) if k < 2 else shape[k] // 2 for k in range(len(shape)))
    return arr[index]


def plot_grid(model, grid, path, metric="kappa", bounds=None, cube=None, title=None):
    """Heat map of ``metric`` over the first two region axes.

    Unreachable cells are blank. With ``bounds`` the dextrous region boundary
    is overlaid; ``cube`` is an optional ``((x0, y0), edge)`` square to outline.
    """
    ax_x, ax_y = grid.region.axes[:2]
    xs, ys = ax_x.samples(), ax_y.samples()
    values = np.asarray(getattr(grid, metric), dtype=float)
    data = np.ma.masked_invalid(_section(grid, values).T)
    data = np.ma.masked_where(data.mask | np.isinf(data.filled(np.nan)), data)

    fig, ax = plt.subplots(figsize=FIGSIZE)
    norm = None
    if metric == "kappa" and data.count():
        norm = LogNorm(vmin=1.0, vmax=max(1.0 + 1e-9, float(data.max())))
    mesh = ax.pcolormesh(xs, ys, data, shading="nearest", cmap="viridis", norm=norm)
    fig.colorbar(mesh, ax=ax, label=metric.replace("_", " "))

    if bounds is not None and len(xs) > 1 and len(ys) > 1:
        mask = _section(grid, dextrous_region(grid, bounds)).T.astype(float)
        if 0 < mask.sum() < mask.size:
            ax.contour(xs, ys, mask, levels=[0.5], colors="w", linewidths=1.2)
    if cube is not None:
        (x0, y0), edge = cube
        ax.add_patch(Rectangle((x0, y0), edge, edge, fill=False, ec="r", lw=1.5))

    names = model.pose_axes
    ax.set_xlabel(f"{names[0]} [mm]")
    ax.set_ylabel(f"{names[1]} [mm]")
    if len(grid.region.axes) > 2:
        fixed = ", ".join(f"{n} = {a.samples()[a.count // 2]:.4g}"
                          for n, a in zip(names[2:], grid.region.axes[2:]))
        ax.set_title(title or f"{model.kind.value} section at {fixed}")
    else:
        ax.set_title(title or model.kind.value)
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
